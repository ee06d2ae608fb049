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

#include <cstdint>
#include <span>
#include <vector>

#include "tensor.hpp"

namespace s2lc {

inline constexpr float kSigmaMin = 0.11f;
inline constexpr int kAlphabetRadius = 64;
inline constexpr int kCdfPrecision = 16;
inline constexpr std::uint32_t kCdfTotal = 1u << kCdfPrecision;

double standard_normal_cdf(double x);

// Mass of N(mean, sigma^2) convolved with U(-1/2, 1/2) at `value`. Evaluated
// through upper tails so it stays accurate far from the mean.
double gaussian_likelihood(double value, double mean, double sigma);

enum class QuantMode { kMeanCentered, kDirect };

struct QuantizedLatent {
  std::vector<std::int32_t> symbols;
  Tensor reconstruction;
};

// Round half away from zero, saturating at the int32 range. NaN maps to 0.
std::int32_t round_symbol(double v);

QuantizedLatent quantize_latent(const Tensor& y, const Tensor& mean, QuantMode mode);

// Symbols -R..R map to indices 0..2R; index 2R+1 is the escape symbol.
class QuantizedCdf {
 public:
  QuantizedCdf(int radius, std::vector<std::uint32_t> cumulative);

  int radius() const noexcept { return radius_; }
  std::size_t alphabet_size() const noexcept { return cumulative_.size() - 1; }
  std::uint32_t escape_index() const noexcept { return 2 * radius_ + 1; }
  std::uint32_t lower(std::uint32_t index) const { return cumulative_[index]; }
  std::uint32_t frequency(std::uint32_t index) const {
    return cumulative_[index + 1] - cumulative_[index];
  }
  std::span<const std::uint32_t> cumulative() const noexcept { return cumulative_; }

  bool operator==(const QuantizedCdf&) const = default;

 private:
  int radius_;
  std::vector<std::uint32_t> cumulative_;
};

// Discretized Gaussian over [-radius, radius] centred at `center` plus an
// escape symbol holding the tail mass. Every frequency is at least 1 and the
// total is exactly 2^16 (largest-remainder rounding).
QuantizedCdf build_cdf(double center, double sigma, int radius = kAlphabetRadius);

// Byte-wise range coder: 64-bit low window, 32-bit range, carries propagated
// into already emitted bytes. finish() appends the 8 low bytes big-endian.
class RangeEncoder {
 public:
  void encode(std::uint32_t cum_low, std::uint32_t freq);
  void encode_raw16(std::uint32_t value);
  std::vector<std::uint8_t> finish();

 private:
  void propagate_carry();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> bytes);

  std::uint32_t decode(const QuantizedCdf& cdf);
  std::uint32_t decode_raw16();

 private:
  std::uint32_t target();
  void consume(std::uint32_t cum_low, std::uint32_t freq);
  std::uint8_t next_byte();

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
  std::uint64_t low_ = 0;
  std::uint64_t code_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
};

// Out-of-alphabet values go through the escape symbol followed by the value as
// a 32-bit two's complement word, high half first.
void encode_symbol(RangeEncoder& enc, std::int32_t value, const QuantizedCdf& cdf);
std::int32_t decode_symbol(RangeDecoder& dec, const QuantizedCdf& cdf);

// Symbol i is coded with tables[table_index[i]], or tables[i] when
// table_index is empty.
std::vector<std::uint8_t> encode_symbols(std::span<const std::int32_t> symbols,
                                         std::span<const QuantizedCdf> tables,
                                         std::span<const std::uint32_t> table_index = {});
std::vector<std::int32_t> decode_symbols(std::span<const std::uint8_t> bytes,
                                         std::size_t count,
                                         std::span<const QuantizedCdf> tables,
                                         std::span<const std::uint32_t> table_index = {});

// Bits implied by the quantized tables: sum of -log2(freq / 2^16), plus 32 raw
// bits per escaped value.
double ideal_code_length(std::span<const std::int32_t> symbols,
                         std::span<const QuantizedCdf> tables,
                         std::span<const std::uint32_t> table_index = {});

// Per-channel tables for the hyper latent.
struct ZPriorTables {
  std::vector<QuantizedCdf> tables;
};

// z_hat must hold integers; channel c uses tables[c].
std::vector<std::uint8_t> code_z(const Tensor& z_hat, const ZPriorTables& prior);
Tensor decode_z(std::span<const std::uint8_t> bytes, const Tensor::Dims& dims,
                const ZPriorTables& prior);
double estimate_z_rate(const Tensor& z_hat, const ZPriorTables& prior);

// Analytic rate of mean-centred symbols under N(0, sigma^2) * U(-1/2, 1/2).
double estimate_rate(std::span<const std::int32_t> symbols, std::span<const float> sigma);

}  // namespace s2lc
