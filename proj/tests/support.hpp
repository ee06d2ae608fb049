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

#pragma once

// Hand-rolled generators and comparison helpers shared by the test suites.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "coder.hpp"
#include "image.hpp"
#include "tensor.hpp"

namespace s2lc::testing {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  bool coin() { return integer(0, 1) == 1; }

  Tensor tensor(Tensor::Dims dims, double lo = -1.0, double hi = 1.0) {
    Tensor t(dims);
    for (float& v : t.data()) v = static_cast<float>(uniform(lo, hi));
    return t;
  }

  std::vector<float> floats(std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::vector<float> v(n);
    for (float& x : v) x = static_cast<float>(uniform(lo, hi));
    return v;
  }

  Image image(std::uint32_t w, std::uint32_t h) {
    Image img{w, h, std::vector<std::uint8_t>(std::size_t{w} * h * 3)};
    for (auto& b : img.rgb) b = static_cast<std::uint8_t>(integer(0, 255));
    return img;
  }

  std::mt19937_64& engine() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

// Random table: positive frequencies summing to 2^16, optionally peaked.
inline QuantizedCdf random_cdf(Gen& g, int radius) {
  const std::size_t n = 2 * static_cast<std::size_t>(radius) + 2;
  std::vector<double> w(n);
  const double peak = g.uniform(0.0, 8.0);
  for (auto& x : w) x = std::exp(g.uniform(-peak, peak));
  double total = 0;
  for (double x : w) total += x;
  std::vector<std::uint32_t> cum(n + 1, 0);
  std::uint64_t budget = kCdfTotal - n;  // one unit reserved per symbol
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t extra = static_cast<std::uint64_t>(w[i] / total * static_cast<double>(budget));
    if (i + 1 == n) extra = budget - used;
    used += extra;
    cum[i + 1] = cum[i] + 1 + static_cast<std::uint32_t>(extra);
  }
  return QuantizedCdf(radius, std::move(cum));
}

// Draws a symbol from the table's own distribution; the escape slot becomes a
// value outside the alphabet.
inline std::int32_t draw_symbol(Gen& g, const QuantizedCdf& cdf) {
  const auto u = static_cast<std::uint32_t>(g.integer(0, static_cast<int>(kCdfTotal) - 1));
  const auto cum = cdf.cumulative();
  const auto slot = static_cast<std::uint32_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin() - 1);
  if (slot == cdf.escape_index()) {
    const std::int32_t mag = cdf.radius() + 1 + g.integer(0, 1 << 20);
    return g.coin() ? mag : -mag;
  }
  return static_cast<std::int32_t>(slot) - cdf.radius();
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) return INFINITY;
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::fabs(static_cast<double>(a.data()[i]) - b.data()[i]));
  }
  return m;
}

inline double max_abs(const Tensor& a) {
  double m = 0;
  for (float v : a.data()) m = std::max(m, std::fabs(static_cast<double>(v)));
  return m;
}

inline Tensor zeros_like(const Tensor& t) { return Tensor(t.dims()); }

}  // namespace s2lc::testing
