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

#include "transforms.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace s2lc {
namespace {

constexpr Activation kLeaky{ActivationKind::kLeakyRelu, 0.01f};

ConvParams bind_conv(const ModelWeights& w, const std::string& name) {
  return {w.get(name + ".weight"), w.get(name + ".bias")};
}

LinearParams bind_linear(const ModelWeights& w, const std::string& name) {
  return {w.linear(name + ".weight"), w.get(name + ".bias")};
}

std::vector<float> values(const ModelWeights& w, const std::string& name) {
  const auto d = w.get(name).data();
  return {d.begin(), d.end()};
}

Tensor apply(const Tensor& x, const ConvParams& p, const ConvSpec& spec) {
  return conv2d(x, p.weight, p.bias, spec);
}

void check_tau(std::span<const float> tau) {
  for (float t : tau) {
    if (!(t > kTauFloor)) fail(ErrorCode::kContract, "attention temperature must exceed 0.01");
  }
}

Tensor gather_window(const Tensor& x, std::size_t n, std::size_t y0, std::size_t x0, int w) {
  const std::size_t c = x.channels();
  Tensor tokens({1, 1, static_cast<std::size_t>(w * w), c});
  for (int dy = 0; dy < w; ++dy)
    for (int dx = 0; dx < w; ++dx)
      for (std::size_t ch = 0; ch < c; ++ch) {
        tokens.at(0, 0, dy * w + dx, ch) = x.at(n, ch, y0 + dy, x0 + dx);
      }
  return tokens;
}

void scatter_window(const Tensor& tokens, Tensor& x, std::size_t n, std::size_t y0,
                    std::size_t x0, int w) {
  for (int dy = 0; dy < w; ++dy)
    for (int dx = 0; dx < w; ++dx)
      for (std::size_t ch = 0; ch < x.channels(); ++ch) {
        x.at(n, ch, y0 + dy, x0 + dx) = tokens.at(0, 0, dy * w + dx, ch);
      }
}

// Region label of a coordinate after the cyclic shift, so that tokens wrapped
// around from the opposite border are kept apart.
int shift_region(std::size_t pos, std::size_t extent, int window, int shift) {
  if (shift == 0) return 0;
  if (pos < extent - static_cast<std::size_t>(window)) return 0;
  if (pos < extent - static_cast<std::size_t>(shift)) return 1;
  return 2;
}

}  // namespace

Tensor linear_tokens(const Tensor& tokens, const LinearParams& params) {
  const std::size_t in = tokens.width();
  const std::size_t out = params.weight.batch();
  if (params.weight.channels() != in) {
    fail(ErrorCode::kShape, "linear: weight in-features " +
                                std::to_string(params.weight.channels()) + " vs tokens " +
                                std::to_string(in));
  }
  if (!params.bias.empty() && params.bias.size() != out) {
    fail(ErrorCode::kShape, "linear: bias length does not match out-features");
  }
  const std::size_t rows = tokens.size() / std::max<std::size_t>(1, in);
  Tensor result({tokens.batch(), tokens.channels(), tokens.height(), out});
  const float* src = tokens.data().data();
  const float* wt = params.weight.data().data();
  float* dst = result.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t o = 0; o < out; ++o) {
      double acc = params.bias.empty() ? 0.0 : params.bias.data()[o];
      for (std::size_t i = 0; i < in; ++i) {
        acc += static_cast<double>(src[r * in + i]) * wt[o * in + i];
      }
      dst[r * out + o] = static_cast<float>(acc);
    }
  }
  return result;
}

Tensor dense_block(const Tensor& input, const DenseBlockParams& params) {
  std::vector<Tensor> features{input};
  for (const ConvParams& layer : params.layers) {
    const Tensor joined = concat_channels(features);
    features.push_back(activation(apply(joined, layer, ConvSpec::same(3)), kLeaky));
  }
  const Tensor out = apply(concat_channels(features), params.projection, ConvSpec::same(1));
  if (out.channels() != input.channels()) {
    fail(ErrorCode::kShape, "dense_block: projection produces " + std::to_string(out.channels()) +
                                " channels, input has " + std::to_string(input.channels()));
  }
  return out;
}

double log_cpb_coordinate(int delta) {
  const double magnitude = std::log2(1.0 + std::abs(delta)) / std::log2(8.0);
  return delta < 0 ? -magnitude : magnitude;
}

Tensor log_cpb_bias(const LogCpbParams& p, int window) {
  if (window < 1) fail(ErrorCode::kConfig, "log_cpb_bias: window must be positive");
  const auto h = static_cast<std::size_t>(p.heads);
  const auto hidden = static_cast<std::size_t>(p.hidden);
  if (p.fc1_weight.size() != h * hidden * 2 || p.fc1_bias.size() != h * hidden ||
      p.fc2_weight.size() != h * hidden || p.fc2_bias.size() != h) {
    fail(ErrorCode::kShape, "log_cpb_bias: perceptron weights do not match heads/hidden");
  }
  const int span = 2 * window - 1;
  // table[head][dy][dx] over displacements in [-(w-1), w-1]^2
  std::vector<double> table(h * span * span);
  for (std::size_t head = 0; head < h; ++head)
    for (int dy = -(window - 1); dy < window; ++dy)
      for (int dx = -(window - 1); dx < window; ++dx) {
        const double ix = log_cpb_coordinate(dx);
        const double iy = log_cpb_coordinate(dy);
        double out = p.fc2_bias[head];
        for (std::size_t k = 0; k < hidden; ++k) {
          const std::size_t row = head * hidden + k;
          const double pre = p.fc1_weight[row * 2] * ix + p.fc1_weight[row * 2 + 1] * iy +
                             p.fc1_bias[row];
          out += p.fc2_weight[row] * std::max(0.0, pre);
        }
        table[(head * span + dy + window - 1) * span + dx + window - 1] = out;
      }
  const std::size_t t = static_cast<std::size_t>(window * window);
  Tensor bias({1, h, t, t});
  for (std::size_t head = 0; head < h; ++head)
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t j = 0; j < t; ++j) {
        const int dy = static_cast<int>(i / window) - static_cast<int>(j / window);
        const int dx = static_cast<int>(i % window) - static_cast<int>(j % window);
        bias.at(0, head, i, j) = static_cast<float>(
            table[(head * span + dy + window - 1) * span + dx + window - 1]);
      }
  return bias;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return dot / (na * nb);
}

Tensor attention_weights(const Tensor& q, const Tensor& k, std::span<const float> tau,
                         const Tensor& bias, std::span<const std::uint8_t> mask) {
  check_tau(tau);
  const std::size_t heads = tau.size();
  const std::size_t t = q.height();
  const std::size_t c = q.width();
  if (heads == 0 || c % heads != 0) {
    fail(ErrorCode::kShape, "attention: width " + std::to_string(c) +
                                " not divisible by head count " + std::to_string(heads));
  }
  if (k.height() != t || k.width() != c) fail(ErrorCode::kShape, "attention: q/k dims differ");
  if (!bias.empty() && bias.dims() != Tensor::Dims{1, heads, t, t}) {
    fail(ErrorCode::kShape, "attention: bias must be (1, heads, T, T)");
  }
  if (!mask.empty() && mask.size() != t * t) fail(ErrorCode::kShape, "attention: mask must be T*T");
  const std::size_t d = c / heads;
  Tensor weights({1, heads, t, t});
  std::vector<double> row(t);
  std::vector<std::size_t> keys;
  for (std::size_t h = 0; h < heads; ++h) {
    for (std::size_t i = 0; i < t; ++i) {
      keys.clear();
      for (std::size_t j = 0; j < t; ++j) {
        if (!mask.empty() && !mask[i * t + j]) continue;
        keys.push_back(j);
      }
      row.resize(keys.size());
      const auto qi = q.data().subspan(i * c + h * d, d);
      for (std::size_t n = 0; n < keys.size(); ++n) {
        const std::size_t j = keys[n];
        double logit = cosine_similarity(qi, k.data().subspan(j * c + h * d, d)) / tau[h];
        if (!bias.empty()) logit += bias.at(0, h, i, j);
        row[n] = logit;
      }
      softmax_inplace(row);
      for (std::size_t n = 0; n < keys.size(); ++n) {
        weights.at(0, h, i, keys[n]) = static_cast<float>(row[n]);
      }
    }
  }
  return weights;
}

Tensor scaled_cosine_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                               std::span<const float> tau, const Tensor& bias,
                               std::span<const std::uint8_t> mask) {
  if (v.dims() != q.dims()) fail(ErrorCode::kShape, "attention: v dims differ from q");
  const Tensor a = attention_weights(q, k, tau, bias, mask);
  const std::size_t heads = tau.size();
  const std::size_t t = q.height();
  const std::size_t c = q.width();
  const std::size_t d = c / heads;
  Tensor out(q.dims());
  for (std::size_t h = 0; h < heads; ++h)
    for (std::size_t i = 0; i < t; ++i)
      for (std::size_t e = 0; e < d; ++e) {
        double acc = 0;
        for (std::size_t j = 0; j < t; ++j) {
          acc += static_cast<double>(a.at(0, h, i, j)) * v.at(0, 0, j, h * d + e);
        }
        out.at(0, 0, i, h * d + e) = static_cast<float>(acc);
      }
  return out;
}

Tensor s2tl_forward(const Tensor& feature, const S2TLConfig& config, const S2TLParams& params) {
  const int w = config.window;
  const int shift = config.shift;
  if (w < 1 || (shift != 0 && shift != w / 2)) {
    fail(ErrorCode::kConfig, "s2tl: shift must be 0 or window/2");
  }
  const std::size_t c = feature.channels();
  const std::size_t h = feature.height();
  const std::size_t wd = feature.width();
  const std::size_t hp = (h + w - 1) / w * w;
  const std::size_t wp = (wd + w - 1) / w * w;
  const std::size_t heads = params.attention.tau.size();

  Tensor x = pad_zero(feature, hp, wp);
  Tensor valid({1, 1, hp, wp});
  for (std::size_t yy = 0; yy < h; ++yy)
    for (std::size_t xx = 0; xx < wd; ++xx) valid.at(0, 0, yy, xx) = 1.0f;
  if (shift) {
    x = roll(x, -shift, -shift);
    valid = roll(valid, -shift, -shift);
  }

  const Tensor bias = log_cpb_bias(params.attention.cpb, w);
  const std::size_t t = static_cast<std::size_t>(w * w);
  std::vector<std::uint8_t> mask(t * t);
  std::vector<int> label(t);
  Tensor out = x;
  for (std::size_t n = 0; n < x.batch(); ++n) {
    for (std::size_t y0 = 0; y0 < hp; y0 += w) {
      for (std::size_t x0 = 0; x0 < wp; x0 += w) {
        for (std::size_t i = 0; i < t; ++i) {
          const std::size_t yy = y0 + i / w;
          const std::size_t xx = x0 + i % w;
          label[i] = 3 * shift_region(yy, hp, w, shift) + shift_region(xx, wp, w, shift) +
                     (valid.at(0, 0, yy, xx) > 0 ? 0 : 16);
        }
        for (std::size_t i = 0; i < t; ++i)
          for (std::size_t j = 0; j < t; ++j) mask[i * t + j] = label[i] == label[j];

        const Tensor tokens = gather_window(x, n, y0, x0, w);
        const Tensor qkv = linear_tokens(tokens, params.attention.qkv);
        Tensor q({1, 1, t, c}), k({1, 1, t, c}), v({1, 1, t, c});
        for (std::size_t i = 0; i < t; ++i)
          for (std::size_t ch = 0; ch < c; ++ch) {
            q.at(0, 0, i, ch) = qkv.at(0, 0, i, ch);
            k.at(0, 0, i, ch) = qkv.at(0, 0, i, c + ch);
            v.at(0, 0, i, ch) = qkv.at(0, 0, i, 2 * c + ch);
          }
        if (heads == 0 || c % heads != 0) fail(ErrorCode::kShape, "s2tl: width not divisible by heads");
        const Tensor attended = linear_tokens(
            scaled_cosine_attention(q, k, v, params.attention.tau, bias, mask),
            params.attention.proj);
        const Tensor mid =
            add(tokens, layer_norm(attended, params.norm1_gamma, params.norm1_beta));
        const Tensor hidden = activation(linear_tokens(mid, params.mlp_fc1), {ActivationKind::kGelu});
        const Tensor mlp = linear_tokens(hidden, params.mlp_fc2);
        scatter_window(add(mid, layer_norm(mlp, params.norm2_gamma, params.norm2_beta)), out, n,
                       y0, x0, w);
      }
    }
  }
  if (shift) out = roll(out, shift, shift);
  return crop(out, h, wd);
}

Tensor rs2tb_forward(const Tensor& feature, const RS2TBParams& params) {
  // Tokens stay in the (B, C, H, W) layout; embed/unembed are per-token maps.
  Tensor x = conv2d(feature, params.embed.weight, params.embed.bias, ConvSpec::same(1));
  for (std::size_t j = 0; j < params.layers.size(); ++j) {
    const S2TLConfig config{params.window, j % 2 == 0 ? 0 : params.window / 2};
    x = s2tl_forward(x, config, params.layers[j]);
  }
  x = conv2d(x, params.unembed.weight, params.unembed.bias, ConvSpec::same(1));
  return add(feature, x);
}

DenseBlockParams bind_dense_block(const ModelWeights& w, const std::string& prefix) {
  DenseBlockParams p;
  for (int i = 0; i < 5; ++i) p.layers[i] = bind_conv(w, prefix + ".conv" + std::to_string(i));
  p.projection = bind_conv(w, prefix + ".proj");
  return p;
}

S2TLParams bind_s2tl(const ModelWeights& w, const std::string& prefix) {
  S2TLParams p;
  p.attention.tau = values(w, prefix + ".tau");
  p.attention.cpb.heads = static_cast<int>(p.attention.tau.size());
  p.attention.cpb.hidden = static_cast<int>(w.get(prefix + ".cpb.fc2.weight").width());
  p.attention.cpb.fc1_weight = values(w, prefix + ".cpb.fc1.weight");
  p.attention.cpb.fc1_bias = values(w, prefix + ".cpb.fc1.bias");
  p.attention.cpb.fc2_weight = values(w, prefix + ".cpb.fc2.weight");
  p.attention.cpb.fc2_bias = values(w, prefix + ".cpb.fc2.bias");
  p.attention.qkv = bind_linear(w, prefix + ".qkv");
  p.attention.proj = bind_linear(w, prefix + ".proj");
  p.norm1_gamma = values(w, prefix + ".norm1.gamma");
  p.norm1_beta = values(w, prefix + ".norm1.beta");
  p.mlp_fc1 = bind_linear(w, prefix + ".mlp.fc1");
  p.mlp_fc2 = bind_linear(w, prefix + ".mlp.fc2");
  p.norm2_gamma = values(w, prefix + ".norm2.gamma");
  p.norm2_beta = values(w, prefix + ".norm2.beta");
  return p;
}

RS2TBParams bind_rs2tb(const ModelWeights& w, const std::string& prefix) {
  RS2TBParams p;
  p.window = w.profile().window;
  p.embed = bind_linear(w, prefix + ".fe");
  for (int j = 0; j < 2; ++j) p.layers.push_back(bind_s2tl(w, prefix + ".layer" + std::to_string(j)));
  p.unembed = bind_linear(w, prefix + ".fu");
  return p;
}

Tensor analysis_transform(const Tensor& image, const ModelWeights& w) {
  if (image.channels() != 3 || image.height() == 0 || image.width() == 0 ||
      image.height() % 64 != 0 || image.width() % 64 != 0) {
    fail(ErrorCode::kShape, "analysis_transform: expects a 3-channel image padded to multiples "
                            "of 64, got " + to_string(image.dims()));
  }
  Tensor x = add(image, dense_block(image, bind_dense_block(w, "ga.db")));
  x = apply(x, bind_conv(w, "ga.down0"), ConvSpec::down(5));
  for (int k = 0; k < 3; ++k) {
    const std::string stage = "ga.stage" + std::to_string(k);
    x = rs2tb_forward(x, bind_rs2tb(w, stage + ".rs2tb"));
    x = apply(x, bind_conv(w, stage + ".down"), ConvSpec::down(3));
  }
  return x;
}

Tensor synthesis_transform(const Tensor& y_hat, const ModelWeights& w) {
  if (y_hat.channels() != static_cast<std::size_t>(w.profile().m)) {
    fail(ErrorCode::kShape, "synthesis_transform: latent has " + std::to_string(y_hat.channels()) +
                                " channels, profile expects " + std::to_string(w.profile().m));
  }
  Tensor x = y_hat;
  for (int k = 0; k < 3; ++k) {
    const std::string stage = "gs.stage" + std::to_string(k);
    x = apply(x, bind_conv(w, stage + ".up"), ConvSpec::up(3));
    x = rs2tb_forward(x, bind_rs2tb(w, stage + ".rs2tb"));
  }
  x = apply(x, bind_conv(w, "gs.up_final"), ConvSpec::up(5));
  x = add(x, dense_block(x, bind_dense_block(w, "gs.db")));
  for (float& v : x.data()) v = std::isnan(v) ? 0.0f : std::clamp(v, 0.0f, 1.0f);
  return x;
}

Tensor hyper_analysis(const Tensor& y, const ModelWeights& w) {
  Tensor x = activation(apply(y, bind_conv(w, "ha.conv0"), ConvSpec::down(3)), kLeaky);
  return apply(x, bind_conv(w, "ha.conv1"), ConvSpec::down(3));
}

Tensor hyper_synthesis(const Tensor& z_hat, const ModelWeights& w) {
  Tensor x = activation(apply(z_hat, bind_conv(w, "hs.conv0"), ConvSpec::up(3)), kLeaky);
  return apply(x, bind_conv(w, "hs.conv1"), ConvSpec::up(3));
}

}  // namespace s2lc
