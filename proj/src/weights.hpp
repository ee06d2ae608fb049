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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coder.hpp"
#include "tensor.hpp"

namespace s2lc {

enum class ProfileId : std::uint8_t { kDesk = 0, kFull = 1 };

// Network geometry. Everything else is derived from these numbers.
struct Profile {
  ProfileId id;
  std::string_view name;
  int n;                // hyper / intermediate width
  int m;                // latent width
  int slices;
  int window;
  int heads;            // window attention heads
  int mlp_ratio;
  int cpb_hidden;
  int deform_heads;
  int deform_points;
  float deform_offset_scale;

  int slice_width() const { return m / slices; }
  int context_width() const { return 2 * slice_width(); }
  int map_hidden() const { return context_width() / 2; }
};

const Profile& profile_config(ProfileId id);
std::optional<ProfileId> parse_profile(std::string_view name);

inline constexpr float kTauFloor = 0.01f;

// Growth width of the dense block for a given input width.
int dense_growth(int channels);

struct WeightSpec {
  std::string name;
  std::vector<std::uint32_t> shape;
  float init_scale;   // generator draws offset + U(-scale, scale)
  float init_offset;
};

// Every entry a profile needs, in archive order.
std::vector<WeightSpec> expected_shapes(ProfileId id);

struct WeightEntry {
  std::string name;
  std::vector<std::uint32_t> shape;
  Tensor value;  // shape left-padded with ones to rank 4
};

// Immutable named-tensor archive plus the z prior tables.
class ModelWeights {
 public:
  ModelWeights(ProfileId profile, std::vector<WeightEntry> entries, ZPriorTables z_prior);

  ProfileId profile_id() const noexcept { return profile_; }
  const Profile& profile() const { return profile_config(profile_); }
  const std::vector<WeightEntry>& entries() const noexcept { return entries_; }
  const ZPriorTables& z_prior() const noexcept { return z_prior_; }
  std::uint64_t checksum() const noexcept { return checksum_; }

  bool contains(std::string_view name) const;
  const Tensor& get(std::string_view name) const;
  // A rank-2 (out, in) entry viewed as a 1x1 convolution kernel.
  Tensor linear(std::string_view name) const;

  std::vector<std::uint8_t> serialize() const;

 private:
  ProfileId profile_;
  std::vector<WeightEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
  ZPriorTables z_prior_;
  std::uint64_t checksum_ = 0;
};

// Parses and validates an archive. Without an explicit profile it is inferred
// from the width of the first analysis convolution.
ModelWeights load_weights(std::span<const std::uint8_t> bytes,
                          std::optional<ProfileId> profile = std::nullopt);

// Deterministic pseudo-random archive. Weights come from a fixed integer PRNG;
// the z prior tables go through erf and so rely on the libm in use.
ModelWeights generate_weights(ProfileId profile, std::uint64_t seed);

}  // namespace s2lc
