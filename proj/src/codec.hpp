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
#include <optional>
#include <span>
#include <vector>

#include "image.hpp"
#include "tensor.hpp"
#include "weights.hpp"

namespace s2lc {

inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint32_t kPadMultiple = 64;

struct SliceStreams {
  std::vector<std::uint8_t> anchor;
  std::vector<std::uint8_t> non_anchor;

  bool operator==(const SliceStreams&) const = default;
};

// Header, hyper-latent stream and two substreams per slice. Integers are
// big-endian; every stream is prefixed with a u32 byte length.
struct BitstreamContainer {
  std::uint16_t version = kFormatVersion;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  ProfileId profile = ProfileId::kDesk;
  std::uint64_t checksum = 0;
  std::vector<std::uint8_t> z_stream;
  std::vector<SliceStreams> slices;

  std::vector<std::uint8_t> serialize() const;
  static BitstreamContainer parse(std::span<const std::uint8_t> bytes);

  bool operator==(const BitstreamContainer&) const = default;
};

std::uint32_t padded_side(std::uint32_t side);

// Everything the entropy path produced, kept for encoder/decoder cross-checks.
struct LatentTrace {
  std::vector<std::int32_t> z_symbols;
  std::vector<std::vector<std::int32_t>> anchor_symbols;      // per slice
  std::vector<std::vector<std::int32_t>> non_anchor_symbols;  // per slice
  std::vector<Tensor> slices;  // LRP-corrected y_hat slices
  Tensor y_hat;                // slices concatenated, (1, M, h, w)
};

struct EncodeOptions {
  std::optional<ProfileId> profile;  // must match the weights when given
  bool reconstruct = true;           // run the synthesis transform
};

struct EncodeResult {
  BitstreamContainer container;
  LatentTrace trace;
  Image reconstruction;  // what the decoder will output; empty if skipped
};

EncodeResult encode_image(const Image& image, const ModelWeights& weights,
                          const EncodeOptions& options = {});

struct DecodeResult {
  Image image;
  LatentTrace trace;
};

DecodeResult decode_image(const BitstreamContainer& container, const ModelWeights& weights);

// Entropy decoding without synthesis. If it throws, `trace` keeps every
// symbol decoded before the failure.
void decode_latents(const BitstreamContainer& container, const ModelWeights& weights,
                    LatentTrace& trace);

// Entropy parameters of every slice given candidate y_hat slices, computed as
// the decoder would see them.
struct SliceParameters {
  Tensor anchor_mean, anchor_scale;
  Tensor non_anchor_mean, non_anchor_scale;
};
std::vector<SliceParameters> slice_parameters(const Tensor& phi_hs,
                                              std::span<const Tensor> y_hat_slices,
                                              const ModelWeights& weights);

}  // namespace s2lc
