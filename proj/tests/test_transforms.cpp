// Copyright 2026 The s2lc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <cmath>

#include "error.hpp"
#include "oracles.hpp"
#include "support.hpp"
#include "transforms.hpp"

using namespace s2lc;
using s2lc::testing::Gen;
using s2lc::testing::zero_s2tl;
using s2lc::testing::max_abs_diff;

namespace {

LinearParams random_linear(Gen& g, std::size_t out, std::size_t in, double scale) {
  return {g.tensor({out, in, 1, 1}, -scale, scale), g.tensor({1, 1, 1, out}, -scale, scale)};
}

LogCpbParams random_cpb(Gen& g, int heads, int hidden) {
  LogCpbParams p;
  p.heads = heads;
  p.hidden = hidden;
  p.fc1_weight = g.floats(heads * hidden * 2);
  p.fc1_bias = g.floats(heads * hidden);
  p.fc2_weight = g.floats(heads * hidden);
  p.fc2_bias = g.floats(heads);
  return p;
}

S2TLParams random_s2tl(Gen& g, std::size_t c, int heads, double scale = 0.5) {
  S2TLParams p;
  for (int h = 0; h < heads; ++h) p.attention.tau.push_back(static_cast<float>(g.uniform(0.05, 1.0)));
  p.attention.cpb = random_cpb(g, heads, 4);
  p.attention.qkv = random_linear(g, 3 * c, c, scale);
  p.attention.proj = random_linear(g, c, c, scale);
  p.norm1_gamma = g.floats(c, 0.5, 1.5);
  p.norm1_beta = g.floats(c, -0.2, 0.2);
  p.mlp_fc1 = random_linear(g, 2 * c, c, scale);
  p.mlp_fc2 = random_linear(g, c, 2 * c, scale);
  p.norm2_gamma = g.floats(c, 0.5, 1.5);
  p.norm2_beta = g.floats(c, -0.2, 0.2);
  return p;
}

long double ld_gelu(long double x) { return 0.5L * x * (1 + std::erf(x / std::sqrt(2.0L))); }

std::vector<long double> ld_linear(const std::vector<long double>& x, const LinearParams& p) {
  const std::size_t out = p.weight.batch(), in = p.weight.channels();
  std::vector<long double> y(out);
  for (std::size_t o = 0; o < out; ++o) {
    long double acc = p.bias.empty() ? 0 : p.bias.data()[o];
    for (std::size_t i = 0; i < in; ++i) acc += x[i] * p.weight.data()[o * in + i];
    y[o] = acc;
  }
  return y;
}

std::vector<long double> ld_layer_norm(const std::vector<long double>& x, const std::vector<float>& gamma,
                                       const std::vector<float>& beta) {
  long double mean = 0, var = 0;
  for (auto v : x) mean += v;
  mean /= x.size();
  for (auto v : x) var += (v - mean) * (v - mean);
  var /= x.size();
  std::vector<long double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = (x[i] - mean) / std::sqrt(var + 1e-5L) * gamma[i] + beta[i];
  return y;
}

}  // namespace

TEST_CASE("dense_block: zero weights give zero, dims preserved") {
  DenseBlockParams p;
  const std::size_t c = 4, g = 2;
  for (std::size_t i = 0; i < 5; ++i) p.layers[i] = {Tensor({g, c + i * g, 3, 3}), Tensor()};
  p.projection = {Tensor({c, c + 5 * g, 1, 1}), Tensor()};
  Gen gen(31);
  const Tensor x = gen.tensor({1, c, 8, 8});
  const Tensor out = dense_block(x, p);
  CHECK(out.dims() == x.dims());
  CHECK(s2lc::testing::max_abs(out) == 0.0);

  // Layer 2 must read C + g channels; a kernel sized for C is rejected.
  p.layers[1] = {Tensor({g, c, 3, 3}), Tensor()};
  CHECK_THROWS_AS(dense_block(x, p), Error);
}

TEST_CASE("log-CPB: coordinate map and degenerate windows") {
  CHECK(log_cpb_coordinate(7) == 1.0);
  CHECK(log_cpb_coordinate(-7) == -1.0);
  CHECK(log_cpb_coordinate(0) == 0.0);
  CHECK(log_cpb_coordinate(1) == doctest::Approx(1.0 / 3));

  Gen g(32);
  const LogCpbParams p = random_cpb(g, 2, 3);
  const Tensor one = log_cpb_bias(p, 1);
  CHECK(one.dims() == Tensor::Dims{1, 2, 1, 1});
  // Zero displacement feeds (0, 0) to the perceptron.
  for (int h = 0; h < 2; ++h) {
    double expect = p.fc2_bias[h];
    for (int k = 0; k < 3; ++k) expect += p.fc2_weight[h * 3 + k] * std::max(0.0f, p.fc1_bias[h * 3 + k]);
    CHECK(one.at(0, h, 0, 0) == doctest::Approx(expect).epsilon(1e-6));
  }
  const Tensor four = log_cpb_bias(p, 4);
  CHECK(four.dims() == Tensor::Dims{1, 2, 16, 16});
  // Same displacement, same bias.
  CHECK(four.at(0, 1, 0, 5) == four.at(0, 1, 10, 15));
}

TEST_CASE("scaled cosine attention: degenerate cases") {
  const std::vector<float> tau = {0.5f};
  const Tensor v({1, 1, 1, 3}, {1, 2, 3});
  Gen g(33);
  const Tensor single = scaled_cosine_attention(g.tensor({1, 1, 1, 3}), g.tensor({1, 1, 1, 3}), v, tau, Tensor());
  CHECK(bitwise_equal(single, v));

  // Same direction for every token: the row is constant 1/tau, hence uniform.
  const Tensor same({1, 1, 4, 2}, {1, 1, 2, 2, 3, 3, 4, 4});
  const Tensor u = attention_weights(same, same, tau, Tensor());
  for (float w : u.data()) CHECK(w == doctest::Approx(0.25).epsilon(1e-7));

  const std::vector<float> low = {0.01f};
  CHECK_THROWS_AS(attention_weights(same, same, low, Tensor()), Error);
}

TEST_CASE("scaled cosine attention: direct formula on a 4-token window") {
  Gen g(34);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor q = g.tensor({1, 1, 4, 5}), k = g.tensor({1, 1, 4, 5}), v = g.tensor({1, 1, 4, 5});
    const Tensor bias = g.tensor({1, 1, 4, 4});
    const std::vector<float> tau = {static_cast<float>(g.uniform(0.05, 2))};
    const Tensor out = scaled_cosine_attention(q, k, v, tau, bias);
    for (std::size_t i = 0; i < 4; ++i) {
      long double logits[4], z = 0;
      for (std::size_t j = 0; j < 4; ++j) {
        long double dot = 0, nq = 0, nk = 0;
        for (std::size_t e = 0; e < 5; ++e) {
          dot += static_cast<long double>(q.at(0, 0, i, e)) * k.at(0, 0, j, e);
          nq += static_cast<long double>(q.at(0, 0, i, e)) * q.at(0, 0, i, e);
          nk += static_cast<long double>(k.at(0, 0, j, e)) * k.at(0, 0, j, e);
        }
        logits[j] = std::exp(dot / std::sqrt(nq * nk) / tau[0] + bias.at(0, 0, i, j));
        z += logits[j];
      }
      for (std::size_t e = 0; e < 5; ++e) {
        long double acc = 0;
        for (std::size_t j = 0; j < 4; ++j) acc += logits[j] / z * v.at(0, 0, j, e);
        CHECK(std::fabs(out.at(0, 0, i, e) - static_cast<double>(acc)) <= 1e-6);
      }
    }
  }
}

TEST_CASE("scaled cosine attention: rows sum to one and ignore positive rescaling") {
  Gen g(35);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t t = g.integer(1, 16), heads = g.integer(1, 3), c = heads * g.integer(1, 4);
    const Tensor q = g.tensor({1, 1, t, c}, -2, 2), k = g.tensor({1, 1, t, c}, -2, 2);
    const std::vector<float> tau = g.floats(heads, 0.02, 1.0);
    const Tensor bias = g.tensor({1, heads, t, t});
    const Tensor a = attention_weights(q, k, tau, bias);
    for (std::size_t h = 0; h < heads; ++h)
      for (std::size_t i = 0; i < t; ++i) {
        double sum = 0;
        for (std::size_t j = 0; j < t; ++j) sum += a.at(0, h, i, j);
        CHECK(std::fabs(sum - 1.0) <= 1e-6);
      }
    const Tensor b = attention_weights(scale(q, static_cast<float>(g.uniform(0.1, 10))),
                                       scale(k, static_cast<float>(g.uniform(0.1, 10))), tau, bias);
    CHECK(max_abs_diff(a, b) <= 1e-6);
  }
}

TEST_CASE("s2tl: zero weights are the identity, constants stay constant") {
  Gen g(36);
  const Tensor x = g.tensor({1, 4, 5, 7});
  CHECK(bitwise_equal(s2tl_forward(x, {4, 0}, zero_s2tl(4, 2)), x));
  CHECK(bitwise_equal(s2tl_forward(x, {4, 2}, zero_s2tl(4, 2)), x));

  Tensor flat({1, 4, 8, 8});
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 0; i < 64; ++i) flat.data()[c * 64 + i] = 0.3f * static_cast<float>(c) - 0.4f;
  const Tensor once = s2tl_forward(flat, {4, 0}, random_s2tl(g, 4, 2));
  const Tensor twice = s2tl_forward(once, {4, 2}, random_s2tl(g, 4, 2));
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t i = 1; i < 64; ++i) {
      CHECK(twice.data()[c * 64 + i] == doctest::Approx(twice.data()[c * 64]).epsilon(1e-6));
    }
}

TEST_CASE("s2tl: one 2x2 window against hand arithmetic") {
  Gen g(37);
  const std::size_t c = 2;
  const S2TLParams p = random_s2tl(g, c, 1, 1.0);
  const Tensor x = g.tensor({1, c, 2, 2});
  const Tensor out = s2tl_forward(x, {2, 0}, p);

  std::vector<std::vector<long double>> tok(4), q(4), k(4), v(4);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) tok[i].push_back(x.at(0, ch, i / 2, i % 2));
    const auto qkv = ld_linear(tok[i], p.attention.qkv);
    q[i] = {qkv[0], qkv[1]};
    k[i] = {qkv[2], qkv[3]};
    v[i] = {qkv[4], qkv[5]};
  }
  const auto& cpb = p.attention.cpb;
  auto bias = [&](int dy, int dx) {
    auto coord = [](int d) { return (d < 0 ? -1.0L : 1.0L) * std::log2(1.0L + std::abs(d)) / 3.0L; };
    long double acc = cpb.fc2_bias[0];
    for (int m = 0; m < cpb.hidden; ++m) {
      const long double pre = cpb.fc1_weight[m * 2] * coord(dx) + cpb.fc1_weight[m * 2 + 1] * coord(dy) + cpb.fc1_bias[m];
      acc += cpb.fc2_weight[m] * std::max(0.0L, pre);
    }
    return acc;
  };
  for (std::size_t i = 0; i < 4; ++i) {
    long double w[4], z = 0;
    for (std::size_t j = 0; j < 4; ++j) {
      const long double dot = q[i][0] * k[j][0] + q[i][1] * k[j][1];
      const long double n = std::hypot(q[i][0], q[i][1]) * std::hypot(k[j][0], k[j][1]);
      const int dy = static_cast<int>(i / 2) - static_cast<int>(j / 2);
      const int dx = static_cast<int>(i % 2) - static_cast<int>(j % 2);
      w[j] = std::exp(dot / n / p.attention.tau[0] + bias(dy, dx));
      z += w[j];
    }
    std::vector<long double> att(c, 0);
    for (std::size_t j = 0; j < 4; ++j)
      for (std::size_t ch = 0; ch < c; ++ch) att[ch] += w[j] / z * v[j][ch];
    const auto a = ld_layer_norm(ld_linear(att, p.attention.proj), p.norm1_gamma, p.norm1_beta);
    std::vector<long double> mid(c);
    for (std::size_t ch = 0; ch < c; ++ch) mid[ch] = tok[i][ch] + a[ch];
    auto hidden = ld_linear(mid, p.mlp_fc1);
    for (auto& h : hidden) h = ld_gelu(h);
    const auto m = ld_layer_norm(ld_linear(hidden, p.mlp_fc2), p.norm2_gamma, p.norm2_beta);
    for (std::size_t ch = 0; ch < c; ++ch) {
      CHECK(std::fabs(out.at(0, ch, i / 2, i % 2) - static_cast<double>(mid[ch] + m[ch])) <= 1e-5);
    }
  }
}

TEST_CASE("s2tl: padded tokens never influence real ones") {
  Gen g(38);
  const S2TLParams p = random_s2tl(g, 4, 2);
  const Tensor x = g.tensor({1, 4, 5, 6});
  const Tensor out = s2tl_forward(x, {4, 0}, p);
  CHECK(out.dims() == x.dims());
  CHECK(s2tl_forward(x, {4, 2}, p).dims() == x.dims());
  // The bottom-right window holds two real tokens at window offsets (0,0) and
  // (0,1); run alone they sit at the same offsets with only padding around.
  Tensor corner({1, 4, 1, 2});
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t xx = 0; xx < 2; ++xx) corner.at(0, c, 0, xx) = x.at(0, c, 4, 4 + xx);
  const Tensor alone = s2tl_forward(corner, {4, 0}, p);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t xx = 0; xx < 2; ++xx) CHECK(alone.at(0, c, 0, xx) == out.at(0, c, 4, 4 + xx));
}

TEST_CASE("rs2tb: zero weights are the identity, composition is sequential") {
  Gen g(39);
  RS2TBParams zero;
  zero.window = 4;
  zero.embed = {Tensor({4, 4, 1, 1}), Tensor()};
  zero.unembed = {Tensor({4, 4, 1, 1}), Tensor()};
  zero.layers = {zero_s2tl(4, 2), zero_s2tl(4, 2)};
  for (auto [h, w] : {std::pair{5, 7}, std::pair{8, 8}, std::pair{1, 13}}) {
    const Tensor x = g.tensor({1, 4, static_cast<std::size_t>(h), static_cast<std::size_t>(w)});
    CHECK(bitwise_equal(rs2tb_forward(x, zero), x));
  }

  RS2TBParams p;
  p.window = 4;
  p.embed = random_linear(g, 4, 4, 0.5);
  p.unembed = random_linear(g, 4, 4, 0.5);
  p.layers = {random_s2tl(g, 4, 2), random_s2tl(g, 4, 2)};
  const Tensor x = g.tensor({1, 4, 9, 6});
  const Tensor out = rs2tb_forward(x, p);
  CHECK(out.dims() == x.dims());
  Tensor seq = conv2d(x, p.embed.weight, p.embed.bias, ConvSpec::same(1));
  seq = s2tl_forward(seq, {4, 0}, p.layers[0]);
  seq = s2tl_forward(seq, {4, 2}, p.layers[1]);
  seq = add(x, conv2d(seq, p.unembed.weight, p.unembed.bias, ConvSpec::same(1)));
  CHECK(bitwise_equal(out, seq));
}

TEST_CASE("transforms: shape contracts on the desk profile") {
  const ModelWeights w = generate_weights(ProfileId::kDesk, 5);
  Gen g(40);
  const Tensor y = analysis_transform(g.tensor({1, 3, 64, 64}, 0, 1), w);
  CHECK(y.dims() == Tensor::Dims{1, 32, 4, 4});
  CHECK(analysis_transform(g.tensor({1, 3, 128, 64}, 0, 1), w).dims() == Tensor::Dims{1, 32, 8, 4});
  CHECK_THROWS_AS(analysis_transform(g.tensor({1, 3, 60, 64}, 0, 1), w), Error);

  const Tensor x_hat = synthesis_transform(g.tensor({1, 32, 4, 4}, -20, 20), w);
  CHECK(x_hat.dims() == Tensor::Dims{1, 3, 64, 64});
  for (float v : x_hat.data()) CHECK((v >= 0.0f && v <= 1.0f));

  const Tensor z = hyper_analysis(g.tensor({1, 32, 8, 8}), w);
  CHECK(z.dims() == Tensor::Dims{1, 8, 2, 2});
  CHECK(hyper_synthesis(z, w).dims() == Tensor::Dims{1, 64, 8, 8});

  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t h = 64 * g.integer(1, 3), wd = 64 * g.integer(1, 2);
    const Tensor x = g.tensor({1, 3, h, wd}, 0, 1);
    CHECK(synthesis_transform(analysis_transform(x, w), w).dims() == x.dims());
  }
}

TEST_CASE("transforms: full profile latent width") {
  const ModelWeights w = generate_weights(ProfileId::kFull, 5);
  Gen g(41);
  CHECK(analysis_transform(g.tensor({1, 3, 64, 64}, 0, 1), w).dims() == Tensor::Dims{1, 320, 4, 4});
}
