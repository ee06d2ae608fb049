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

#include "coder.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace s2lc {
namespace {

constexpr std::uint32_t kRenormBound = 1u << 24;

void check_sigma(double sigma) {
  if (!(sigma >= static_cast<double>(kSigmaMin))) {
    fail(ErrorCode::kContract,
         "sigma " + std::to_string(sigma) + " below floor " + std::to_string(kSigmaMin));
  }
}

// Upper tail P(X > x) for X ~ N(0, 1).
double upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

std::uint32_t table_for(std::span<const std::uint32_t> table_index, std::size_t i,
                        std::size_t table_count) {
  const std::size_t t = table_index.empty() ? i : table_index[i];
  if (t >= table_count) {
    fail(ErrorCode::kShape, "symbol " + std::to_string(i) + " refers to missing table " +
                                std::to_string(t));
  }
  return static_cast<std::uint32_t>(t);
}

void check_sequence(std::size_t count, std::span<const QuantizedCdf> tables,
                    std::span<const std::uint32_t> table_index) {
  if (table_index.empty() ? tables.size() < count : table_index.size() != count) {
    fail(ErrorCode::kShape, "symbol count " + std::to_string(count) +
                                " does not match the table sequence");
  }
}

}  // namespace

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double gaussian_likelihood(double value, double mean, double sigma) {
  check_sigma(sigma);
  const double d = std::fabs(value - mean);
  const double p = upper_tail((d - 0.5) / sigma) - upper_tail((d + 0.5) / sigma);
  return std::clamp(p, DBL_MIN, 1.0);
}

std::int32_t round_symbol(double v) {
  if (std::isnan(v)) return 0;
  const double r = std::round(v);
  if (r >= static_cast<double>(std::numeric_limits<std::int32_t>::max())) {
    return std::numeric_limits<std::int32_t>::max();
  }
  if (r <= static_cast<double>(std::numeric_limits<std::int32_t>::min())) {
    return std::numeric_limits<std::int32_t>::min();
  }
  return static_cast<std::int32_t>(r);
}

QuantizedLatent quantize_latent(const Tensor& y, const Tensor& mean, QuantMode mode) {
  if (y.dims() != mean.dims()) {
    fail(ErrorCode::kShape, "quantize_latent: mean dims " + to_string(mean.dims()) +
                                " do not match latent " + to_string(y.dims()));
  }
  QuantizedLatent out{std::vector<std::int32_t>(y.size()), Tensor(y.dims())};
  auto src = y.data();
  auto mu = mean.data();
  auto rec = out.reconstruction.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    if (mode == QuantMode::kMeanCentered) {
      out.symbols[i] = round_symbol(static_cast<double>(src[i]) - mu[i]);
      rec[i] = static_cast<float>(out.symbols[i]) + mu[i];
    } else {
      out.symbols[i] = round_symbol(src[i]);
      rec[i] = static_cast<float>(out.symbols[i]);
    }
  }
  return out;
}

QuantizedCdf::QuantizedCdf(int radius, std::vector<std::uint32_t> cumulative)
    : radius_(radius), cumulative_(std::move(cumulative)) {
  if (radius_ < 0 || cumulative_.size() != static_cast<std::size_t>(2 * radius_ + 3)) {
    fail(ErrorCode::kFormat, "cdf: table size does not match radius " + std::to_string(radius_));
  }
  if (cumulative_.front() != 0 || cumulative_.back() != kCdfTotal) {
    fail(ErrorCode::kFormat, "cdf: table must span [0, 65536]");
  }
  for (std::size_t i = 1; i < cumulative_.size(); ++i) {
    if (cumulative_[i] <= cumulative_[i - 1]) {
      fail(ErrorCode::kFormat, "cdf: table not strictly increasing at " + std::to_string(i));
    }
  }
}

QuantizedCdf build_cdf(double center, double sigma, int radius) {
  check_sigma(sigma);
  if (radius < 0 || 2 * radius + 2 > static_cast<int>(kCdfTotal)) {
    fail(ErrorCode::kConfig, "cdf: radius out of range");
  }
  const std::size_t count = 2 * static_cast<std::size_t>(radius) + 2;
  std::vector<double> mass(count);
  for (int s = -radius; s <= radius; ++s) {
    mass[s + radius] = gaussian_likelihood(s, center, sigma);
  }
  const double edge = radius + 0.5;
  mass[count - 1] = upper_tail((edge + center) / sigma) + upper_tail((edge - center) / sigma);
  double total = 0;
  for (double m : mass) total += m;

  std::vector<double> quota(count);
  std::vector<std::int64_t> freq(count);
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < count; ++i) {
    quota[i] = mass[i] / total * static_cast<double>(kCdfTotal);
    freq[i] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(quota[i])));
    assigned += freq[i];
  }
  // Largest remainder: hand out missing units to the most under-served
  // symbols, reclaim surplus from the most over-served ones (never below 1).
  std::int64_t diff = static_cast<std::int64_t>(kCdfTotal) - assigned;
  while (diff > 0) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < count; ++i) {
      if (quota[i] - freq[i] > quota[best] - freq[best]) best = i;
    }
    ++freq[best];
    --diff;
  }
  while (diff < 0) {
    std::size_t best = count;
    for (std::size_t i = 0; i < count; ++i) {
      if (freq[i] <= 1) continue;
      if (best == count || quota[i] - freq[i] < quota[best] - freq[best]) best = i;
    }
    --freq[best];
    ++diff;
  }

  std::vector<std::uint32_t> cumulative(count + 1, 0);
  for (std::size_t i = 0; i < count; ++i) {
    cumulative[i + 1] = cumulative[i] + static_cast<std::uint32_t>(freq[i]);
  }
  return QuantizedCdf(radius, std::move(cumulative));
}

void RangeEncoder::propagate_carry() {
  for (auto it = out_.rbegin(); it != out_.rend(); ++it) {
    if (++*it != 0) return;
  }
  fail(ErrorCode::kContract, "range coder: carry past stream start");
}

void RangeEncoder::encode(std::uint32_t cum_low, std::uint32_t freq) {
  const std::uint32_t r = range_ >> kCdfPrecision;
  const std::uint64_t before = low_;
  low_ += static_cast<std::uint64_t>(r) * cum_low;
  if (low_ < before) propagate_carry();
  range_ = r * freq;
  while (range_ < kRenormBound) {
    out_.push_back(static_cast<std::uint8_t>(low_ >> 56));
    low_ <<= 8;
    range_ <<= 8;
  }
}

void RangeEncoder::encode_raw16(std::uint32_t value) { encode(value & 0xFFFFu, 1); }

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<std::uint8_t>(low_ >> shift));
  }
  std::vector<std::uint8_t> result = std::move(out_);
  out_.clear();
  low_ = 0;
  range_ = 0xFFFFFFFFu;
  return result;
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
  for (int i = 0; i < 8; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() {
  if (pos_ >= bytes_.size()) fail(ErrorCode::kTruncated, "truncated stream");
  return bytes_[pos_++];
}

std::uint32_t RangeDecoder::target() {
  const std::uint32_t r = range_ >> kCdfPrecision;
  const std::uint64_t offset = code_ - low_;
  return static_cast<std::uint32_t>(std::min<std::uint64_t>(offset / r, kCdfTotal - 1));
}

void RangeDecoder::consume(std::uint32_t cum_low, std::uint32_t freq) {
  const std::uint32_t r = range_ >> kCdfPrecision;
  low_ += static_cast<std::uint64_t>(r) * cum_low;
  range_ = r * freq;
  while (range_ < kRenormBound) {
    low_ <<= 8;
    code_ = (code_ << 8) | next_byte();
    range_ <<= 8;
  }
}

std::uint32_t RangeDecoder::decode(const QuantizedCdf& cdf) {
  const std::uint32_t t = target();
  const auto cum = cdf.cumulative();
  const auto it = std::upper_bound(cum.begin(), cum.end(), t);
  const auto index = static_cast<std::uint32_t>(it - cum.begin() - 1);
  consume(cdf.lower(index), cdf.frequency(index));
  return index;
}

std::uint32_t RangeDecoder::decode_raw16() {
  const std::uint32_t value = target();
  consume(value, 1);
  return value;
}

void encode_symbol(RangeEncoder& enc, std::int32_t value, const QuantizedCdf& cdf) {
  const std::int64_t index = static_cast<std::int64_t>(value) + cdf.radius();
  if (index >= 0 && index <= 2 * static_cast<std::int64_t>(cdf.radius())) {
    const auto i = static_cast<std::uint32_t>(index);
    enc.encode(cdf.lower(i), cdf.frequency(i));
    return;
  }
  const std::uint32_t esc = cdf.escape_index();
  enc.encode(cdf.lower(esc), cdf.frequency(esc));
  const auto word = static_cast<std::uint32_t>(value);
  enc.encode_raw16(word >> 16);
  enc.encode_raw16(word & 0xFFFFu);
}

std::int32_t decode_symbol(RangeDecoder& dec, const QuantizedCdf& cdf) {
  const std::uint32_t index = dec.decode(cdf);
  if (index != cdf.escape_index()) {
    return static_cast<std::int32_t>(index) - cdf.radius();
  }
  const std::uint32_t high = dec.decode_raw16();
  const std::uint32_t low = dec.decode_raw16();
  return static_cast<std::int32_t>((high << 16) | low);
}

std::vector<std::uint8_t> encode_symbols(std::span<const std::int32_t> symbols,
                                         std::span<const QuantizedCdf> tables,
                                         std::span<const std::uint32_t> table_index) {
  check_sequence(symbols.size(), tables, table_index);
  RangeEncoder enc;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    encode_symbol(enc, symbols[i], tables[table_for(table_index, i, tables.size())]);
  }
  return enc.finish();
}

std::vector<std::int32_t> decode_symbols(std::span<const std::uint8_t> bytes,
                                         std::size_t count,
                                         std::span<const QuantizedCdf> tables,
                                         std::span<const std::uint32_t> table_index) {
  check_sequence(count, tables, table_index);
  RangeDecoder dec(bytes);
  std::vector<std::int32_t> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = decode_symbol(dec, tables[table_for(table_index, i, tables.size())]);
  }
  return out;
}

double ideal_code_length(std::span<const std::int32_t> symbols,
                         std::span<const QuantizedCdf> tables,
                         std::span<const std::uint32_t> table_index) {
  check_sequence(symbols.size(), tables, table_index);
  double bits = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    const QuantizedCdf& cdf = tables[table_for(table_index, i, tables.size())];
    const std::int64_t index = static_cast<std::int64_t>(symbols[i]) + cdf.radius();
    std::uint32_t slot = cdf.escape_index();
    if (index >= 0 && index <= 2 * static_cast<std::int64_t>(cdf.radius())) {
      slot = static_cast<std::uint32_t>(index);
    } else {
      bits += 32;
    }
    bits += kCdfPrecision - std::log2(static_cast<double>(cdf.frequency(slot)));
  }
  return bits;
}

namespace {

std::vector<std::uint32_t> z_table_index(const Tensor::Dims& dims, std::size_t table_count) {
  if (dims[1] != table_count) {
    fail(ErrorCode::kShape, "z has " + std::to_string(dims[1]) + " channels but " +
                                std::to_string(table_count) + " prior tables");
  }
  std::vector<std::uint32_t> index;
  index.reserve(dims[0] * dims[1] * dims[2] * dims[3]);
  for (std::size_t n = 0; n < dims[0]; ++n)
    for (std::size_t c = 0; c < dims[1]; ++c)
      for (std::size_t i = 0; i < dims[2] * dims[3]; ++i) {
        index.push_back(static_cast<std::uint32_t>(c));
      }
  return index;
}

std::vector<std::int32_t> z_symbols(const Tensor& z_hat) {
  std::vector<std::int32_t> symbols(z_hat.size());
  std::transform(z_hat.data().begin(), z_hat.data().end(), symbols.begin(),
                 [](float v) { return round_symbol(v); });
  return symbols;
}

}  // namespace

std::vector<std::uint8_t> code_z(const Tensor& z_hat, const ZPriorTables& prior) {
  const auto index = z_table_index(z_hat.dims(), prior.tables.size());
  return encode_symbols(z_symbols(z_hat), prior.tables, index);
}

Tensor decode_z(std::span<const std::uint8_t> bytes, const Tensor::Dims& dims,
                const ZPriorTables& prior) {
  const auto index = z_table_index(dims, prior.tables.size());
  const auto symbols = decode_symbols(bytes, index.size(), prior.tables, index);
  Tensor out(dims);
  std::transform(symbols.begin(), symbols.end(), out.data().begin(),
                 [](std::int32_t s) { return static_cast<float>(s); });
  return out;
}

double estimate_z_rate(const Tensor& z_hat, const ZPriorTables& prior) {
  const auto index = z_table_index(z_hat.dims(), prior.tables.size());
  return ideal_code_length(z_symbols(z_hat), prior.tables, index);
}

double estimate_rate(std::span<const std::int32_t> symbols, std::span<const float> sigma) {
  if (symbols.size() != sigma.size()) {
    fail(ErrorCode::kShape, "estimate_rate: symbol and sigma counts differ");
  }
  double bits = 0;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    bits -= std::log2(gaussian_likelihood(symbols[i], 0.0, sigma[i]));
  }
  return bits;
}

}  // namespace s2lc
