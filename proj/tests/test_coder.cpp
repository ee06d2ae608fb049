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

#include <cfloat>
#include <cmath>
#include <limits>

#include "coder.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace s2lc;
using s2lc::testing::Gen;

namespace {

// Phi(b) - Phi(a) in long double.
long double normal_mass(long double a, long double b) {
  return 0.5L * (std::erf(b / std::sqrt(2.0L)) - std::erf(a / std::sqrt(2.0L)));
}

}  // namespace

TEST_CASE("gaussian_likelihood: unit bin at the mean") {
  const double p = gaussian_likelihood(0, 0, 1);
  CHECK(std::fabs(p - static_cast<double>(normal_mass(-0.5L, 0.5L))) <= 1e-12);
  CHECK(std::fabs(p - 0.3829249) <= 1e-6);
}

TEST_CASE("gaussian_likelihood: symmetric about the mean") {
  Gen g(21);
  for (int i = 0; i < 200; ++i) {
    // Dyadic values keep mu + d and mu - d exact.
    const double mu = g.integer(-10240, 10240) / 1024.0, d = g.integer(0, 20480) / 1024.0;
    const double s = g.uniform(0.11, 10);
    CHECK(gaussian_likelihood(mu + d, mu, s) == gaussian_likelihood(mu - d, mu, s));
  }
}

TEST_CASE("gaussian_likelihood: integer bins telescope to one") {
  double total = 0;
  for (int k = -40; k <= 40; ++k) total += gaussian_likelihood(k, 0.3, 1.0);
  CHECK(std::fabs(total - 1.0) <= 1e-9);
}

TEST_CASE("gaussian_likelihood: floored, never zero, rejects tiny scales") {
  CHECK(gaussian_likelihood(1e6, 0, 0.11) == DBL_MIN);
  CHECK_THROWS_AS(gaussian_likelihood(0, 0, 0.1), Error);
}

TEST_CASE("quantization: mean-centred rounding") {
  const Tensor y({1, 1, 1, 2}, {1.4f, 1.4f});
  const Tensor mu({1, 1, 1, 2}, {0.0f, 1.4f});
  const auto q = quantize_latent(y, mu, QuantMode::kMeanCentered);
  CHECK(q.symbols[0] == 1);
  CHECK(q.reconstruction.data()[0] == 1.0f);
  CHECK(q.symbols[1] == 0);
  CHECK(q.reconstruction.data()[1] == 1.4f);
  CHECK(round_symbol(-0.5) == -1);
  CHECK(round_symbol(0.5) == 1);
  CHECK(round_symbol(std::nan("")) == 0);
  CHECK(round_symbol(1e30) == std::numeric_limits<std::int32_t>::max());
}

TEST_CASE("build_cdf: floor rule at the minimum scale") {
  const QuantizedCdf cdf = build_cdf(0, kSigmaMin);
  for (std::uint32_t i = 0; i < cdf.alphabet_size(); ++i) CHECK(cdf.frequency(i) >= 1);
  CHECK(cdf.frequency(kAlphabetRadius) > kCdfTotal - 2 * kAlphabetRadius - 2);
}

TEST_CASE("build_cdf: total is exact for random parameters") {
  Gen g(22);
  for (int i = 0; i < 1000; ++i) {
    const QuantizedCdf cdf = build_cdf(g.uniform(-3, 3), std::exp(g.uniform(std::log(0.11), std::log(60.0))));
    CHECK(cdf.cumulative().back() == kCdfTotal);
    for (std::uint32_t s = 0; s < cdf.alphabet_size(); ++s) REQUIRE(cdf.frequency(s) >= 1);
  }
}

TEST_CASE("build_cdf: unit scale stays within the rounding bound of the exact mass") {
  // Every symbol whose exact quota is below one unit is lifted to one; the
  // surplus is reclaimed evenly from the symbols that carry mass, so symbol 0
  // can be off by surplus / carriers plus one rounding unit.
  const QuantizedCdf cdf = build_cdf(0, 1.0);
  double lifted = 0;
  std::uint32_t carriers = 0;
  for (int s = -kAlphabetRadius; s <= kAlphabetRadius + 1; ++s) {
    const long double mass = s <= kAlphabetRadius ? normal_mass(s - 0.5L, s + 0.5L)
                                                  : 2 * normal_mass(kAlphabetRadius + 0.5L, 1e4L);
    const double quota = static_cast<double>(mass) * kCdfTotal;
    if (quota < 1) lifted += 1 - quota;
    if (cdf.frequency(static_cast<std::uint32_t>(s + kAlphabetRadius)) > 1) ++carriers;
  }
  const double bound = (lifted / carriers + 1) / kCdfTotal;
  const double exact = static_cast<double>(normal_mass(-0.5L, 0.5L));
  const double got = static_cast<double>(cdf.frequency(kAlphabetRadius)) / kCdfTotal;
  CHECK(std::fabs(got - exact) <= bound);
  CHECK(bound < 2.5e-4);
  // Symmetric up to one unit.
  for (int s = 1; s <= kAlphabetRadius; ++s) {
    const auto hi = cdf.frequency(static_cast<std::uint32_t>(kAlphabetRadius + s));
    const auto lo = cdf.frequency(static_cast<std::uint32_t>(kAlphabetRadius - s));
    CHECK(std::abs(static_cast<int>(hi) - static_cast<int>(lo)) <= 1);
  }
}

TEST_CASE("QuantizedCdf rejects malformed tables") {
  CHECK_THROWS_AS(QuantizedCdf(1, {0, 100, 200, 65536}), Error);          // wrong size
  CHECK_THROWS_AS(QuantizedCdf(1, {0, 100, 100, 200, 65536}), Error);     // zero frequency
  CHECK_THROWS_AS(QuantizedCdf(1, {0, 100, 200, 300, 65535}), Error);     // wrong total
}

TEST_CASE("range coder: empty sequence flushes a fixed tail") {
  const auto bytes = encode_symbols({}, {});
  CHECK(bytes.size() == 8);
  CHECK(decode_symbols(bytes, 0, {}).empty());
}

TEST_CASE("range coder: half-probability symbol costs one bit plus flush") {
  const QuantizedCdf half(0, {0, 32768, 65536});
  const std::int32_t s = 0;
  const auto bytes = encode_symbols({&s, 1}, {&half, 1});
  CHECK(bytes.size() <= 9);
  CHECK(decode_symbols(bytes, 1, {&half, 1}) == std::vector<std::int32_t>{0});
}

TEST_CASE("range coder: random tables round trip within the ideal length bound") {
  Gen g(23);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<QuantizedCdf> tables;
    for (int t = 0; t < 16; ++t) tables.push_back(s2lc::testing::random_cdf(g, g.integer(0, 64)));
    const std::size_t n = trial == 0 ? 10000 : static_cast<std::size_t>(g.integer(1, 3000));
    std::vector<std::uint32_t> index(n);
    std::vector<std::int32_t> symbols(n);
    for (std::size_t i = 0; i < n; ++i) {
      index[i] = static_cast<std::uint32_t>(g.integer(0, 15));
      symbols[i] = s2lc::testing::draw_symbol(g, tables[index[i]]);
    }
    const auto bytes = encode_symbols(symbols, tables, index);
    CHECK(decode_symbols(bytes, n, tables, index) == symbols);
    const double ideal = ideal_code_length(symbols, tables, index);
    const double actual = 8.0 * static_cast<double>(bytes.size());
    CHECK(actual >= ideal);
    CHECK(actual <= 1.02 * ideal + 512);
  }
}

TEST_CASE("range coder: carries through long runs of 0xFF") {
  // A near-certain symbol at the top of the interval keeps adding to low,
  // which forces carries to ripple through emitted 0xFF bytes.
  const QuantizedCdf skew(1, {0, 1, 2, 65535, 65536});
  Gen g(24);
  std::vector<std::int32_t> symbols(50000, 1);
  for (auto& s : symbols) {
    const int r = g.integer(0, 2999);
    if (r == 0) s = -1;
    if (r == 1) s = 0;
    if (r == 2) s = 1 << 20;
  }
  std::vector<std::uint32_t> index(symbols.size(), 0);
  const auto bytes = encode_symbols(symbols, {&skew, 1}, index);
  CHECK(decode_symbols(bytes, symbols.size(), {&skew, 1}, index) == symbols);
}

TEST_CASE("range coder: escape carries any 32-bit value") {
  const QuantizedCdf cdf = build_cdf(0, 1.0);
  const std::vector<std::int32_t> symbols = {65,
                                             -65,
                                             1000000,
                                             std::numeric_limits<std::int32_t>::min(),
                                             std::numeric_limits<std::int32_t>::max(),
                                             0,
                                             64,
                                             -64};
  std::vector<std::uint32_t> index(symbols.size(), 0);
  const auto bytes = encode_symbols(symbols, {&cdf, 1}, index);
  CHECK(decode_symbols(bytes, symbols.size(), {&cdf, 1}, index) == symbols);
}

TEST_CASE("range coder: truncation is reported") {
  const QuantizedCdf cdf = build_cdf(0, 3.0);
  Gen g(25);
  std::vector<std::int32_t> symbols(2000);
  for (auto& s : symbols) s = g.integer(-5, 5);
  std::vector<std::uint32_t> index(symbols.size(), 0);
  auto bytes = encode_symbols(symbols, {&cdf, 1}, index);
  bytes.resize(bytes.size() / 2);
  try {
    decode_symbols(bytes, symbols.size(), {&cdf, 1}, index);
    FAIL("expected truncation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTruncated);
    CHECK(std::string(e.what()) == "truncated stream");
  }
}

TEST_CASE("hyper latent: zero and random integer fields round trip") {
  Gen g(26);
  ZPriorTables prior;
  for (int c = 0; c < 4; ++c) prior.tables.push_back(build_cdf(0, g.uniform(0.5, 3)));
  const Tensor::Dims dims{1, 4, 3, 5};

  const Tensor zeros(dims);
  CHECK(bitwise_equal(decode_z(code_z(zeros, prior), dims, prior), zeros));

  Tensor z(dims);
  for (float& v : z.data()) v = static_cast<float>(g.integer(-8, 8));
  const auto bytes = code_z(z, prior);
  CHECK(bitwise_equal(decode_z(bytes, dims, prior), z));
  const double ideal = estimate_z_rate(z, prior);
  CHECK(8.0 * static_cast<double>(bytes.size()) <= 1.02 * ideal + 64 * 8);
}

TEST_CASE("estimate_rate: certain symbols are nearly free") {
  const std::vector<std::int32_t> s = {0};
  const std::vector<float> sigma = {kSigmaMin};
  CHECK(estimate_rate(s, sigma) < 1e-4);
  const std::vector<float> wide = {1.0f};
  CHECK(estimate_rate(s, wide) == doctest::Approx(-std::log2(0.3829249)).epsilon(1e-6));
}
