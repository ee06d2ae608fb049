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

#include "weights.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "bytes.hpp"
#include "error.hpp"

namespace s2lc {
namespace {

constexpr char kMagic[] = "S2LW";
constexpr std::uint32_t kVersion = 1;

constexpr Profile kDesk{ProfileId::kDesk, "desk", 8, 32, 4, 4, 2, 2, 64, 2, 4, 4.0f};
constexpr Profile kFull{ProfileId::kFull, "full", 192, 320, 10, 8, 6, 2, 64, 4, 4, 4.0f};

using Shape = std::vector<std::uint32_t>;

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ")";
  return os.str();
}

Tensor::Dims padded_dims(const Shape& shape) {
  Tensor::Dims dims{1, 1, 1, 1};
  const std::size_t offset = 4 - shape.size();
  for (std::size_t i = 0; i < shape.size(); ++i) dims[offset + i] = shape[i];
  return dims;
}

class ShapeTable {
 public:
  explicit ShapeTable(const Profile& p) : p_(p) {}

  void add(std::string name, Shape shape, float scale, float offset = 0.0f) {
    specs_.push_back({std::move(name), std::move(shape), scale, offset});
  }

  void bias(const std::string& name, std::uint32_t n) { add(name, {n}, 0.02f); }

  void conv(const std::string& name, std::uint32_t out, std::uint32_t in, std::uint32_t k,
            float gain = 1.0f) {
    add(name + ".weight", {out, in, k, k}, gain * std::sqrt(3.0f / float(in * k * k)));
    bias(name + ".bias", out);
  }

  void depthwise(const std::string& name, std::uint32_t channels, std::uint32_t k) {
    add(name + ".weight", {channels, 1, k, k}, std::sqrt(3.0f / float(k * k)));
    bias(name + ".bias", channels);
  }

  // Stride-2 transposed convolution; each output sees about a quarter of
  // the kernel taps.
  void tconv(const std::string& name, std::uint32_t in, std::uint32_t out, std::uint32_t k) {
    const float fan_in = std::max(1.0f, float(in * k * k) / 4.0f);
    add(name + ".weight", {in, out, k, k}, std::sqrt(3.0f / fan_in));
    bias(name + ".bias", out);
  }

  void linear(const std::string& name, std::uint32_t out, std::uint32_t in) {
    add(name + ".weight", {out, in}, std::sqrt(3.0f / float(in)));
    bias(name + ".bias", out);
  }

  void norm(const std::string& name, std::uint32_t c) {
    add(name + ".gamma", {c}, 0.1f, 1.0f);
    add(name + ".beta", {c}, 0.02f);
  }

  void dense_block(const std::string& prefix, std::uint32_t c) {
    const auto g = static_cast<std::uint32_t>(dense_growth(static_cast<int>(c)));
    for (std::uint32_t i = 0; i < 5; ++i) {
      conv(prefix + ".conv" + std::to_string(i), g, c + i * g, 3);
    }
    conv(prefix + ".proj", c, c + 5 * g, 1);
  }

  void rs2tb(const std::string& prefix, std::uint32_t c) {
    const auto h = static_cast<std::uint32_t>(p_.heads);
    const auto hidden = static_cast<std::uint32_t>(p_.cpb_hidden);
    const auto r = static_cast<std::uint32_t>(p_.mlp_ratio);
    linear(prefix + ".fe", c, c);
    for (int j = 0; j < 2; ++j) {
      const std::string l = prefix + ".layer" + std::to_string(j);
      linear(l + ".qkv", 3 * c, c);
      add(l + ".tau", {h}, 0.2f, 0.3f);
      add(l + ".cpb.fc1.weight", {h, hidden, 2}, 1.0f);
      add(l + ".cpb.fc1.bias", {h, hidden}, 0.5f);
      add(l + ".cpb.fc2.weight", {h, hidden}, std::sqrt(3.0f / float(hidden)));
      add(l + ".cpb.fc2.bias", {h}, 0.02f);
      linear(l + ".proj", c, c);
      norm(l + ".norm1", c);
      linear(l + ".mlp.fc1", r * c, c);
      linear(l + ".mlp.fc2", c, r * c);
      norm(l + ".norm2", c);
    }
    linear(prefix + ".fu", c, c);
  }

  void adaptive_maps(const std::string& prefix, std::uint32_t cc, std::uint32_t ch) {
    conv(prefix + ".smap.fc1", ch, cc, 1);
    conv(prefix + ".smap.fc2", 1, ch, 1);
    conv(prefix + ".cmap.fc1", ch, cc, 1);
    conv(prefix + ".cmap.fc2", cc, ch, 1);
  }

  std::vector<WeightSpec> build() {
    const auto n = static_cast<std::uint32_t>(p_.n);
    const auto m = static_cast<std::uint32_t>(p_.m);
    const auto s = static_cast<std::uint32_t>(p_.slice_width());
    const auto cc = static_cast<std::uint32_t>(p_.context_width());
    const auto ch = static_cast<std::uint32_t>(p_.map_hidden());
    const auto offsets = static_cast<std::uint32_t>(p_.deform_heads * p_.deform_points * 2);

    dense_block("ga.db", 3);
    conv("ga.down0", n, 3, 5);
    for (int k = 0; k < 3; ++k) {
      const std::string st = "ga.stage" + std::to_string(k);
      rs2tb(st + ".rs2tb", n);
      conv(st + ".down", k == 2 ? m : n, n, 3);
    }
    conv("ha.conv0", n, m, 3);
    conv("ha.conv1", n, n, 3);
    tconv("hs.conv0", n, n, 3);
    tconv("hs.conv1", n, 2 * m, 3);
    for (int k = 0; k < 3; ++k) {
      const std::string st = "gs.stage" + std::to_string(k);
      tconv(st + ".up", k == 0 ? m : n, n, 3);
      rs2tb(st + ".rs2tb", n);
    }
    tconv("gs.up_final", n, 3, 5);
    dense_block("gs.db", 3);

    for (int i = 0; i < p_.slices; ++i) {
      const std::string sl = "em.slice" + std::to_string(i);
      conv(sl + ".hs_proj", cc, 2 * m, 1);
      if (i > 0) conv(sl + ".ctx_proj", cc, static_cast<std::uint32_t>(i) * s, 1);
      adaptive_maps(sl + ".ag", cc, ch);
      depthwise(sl + ".ag.dw", cc, 3);
      conv(sl + ".ag.da.offset", offsets, cc, 3, 0.5f);
      conv(sl + ".ag.da.query", cc, cc, 1);
      conv(sl + ".ag.da.key", cc, cc, 1);
      conv(sl + ".ag.da.value", cc, cc, 1);
      conv(sl + ".ag.da.out", cc, cc, 1);
      adaptive_maps(sl + ".ac", cc, ch);
      depthwise(sl + ".ac.dw", cc, 3);
      conv(sl + ".ac.cw.fc1", cc, cc, 1);
      conv(sl + ".ac.cw.fc2", cc, cc, 1);
      conv(sl + ".ac.cw.gate", cc, cc, 1);
      conv(sl + ".sp", cc, s, 5);
      conv(sl + ".ep.conv0", 2 * cc, 4 * cc, 1);
      conv(sl + ".ep.conv1", 2 * cc, 2 * cc, 1);
      conv(sl + ".ep.conv2", 2 * s, 2 * cc, 1);
      conv(sl + ".lrp.conv0", cc, 2 * cc + s, 3);
      conv(sl + ".lrp.conv1", cc, cc, 3);
      conv(sl + ".lrp.conv2", s, cc, 3);
    }
    return std::move(specs_);
  }

 private:
  const Profile& p_;
  std::vector<WeightSpec> specs_;
};

bool is_tau(std::string_view name) {
  return name.size() >= 4 && name.substr(name.size() - 4) == ".tau";
}

void validate(ProfileId id, const std::vector<WeightEntry>& entries, const ZPriorTables& z) {
  std::unordered_map<std::string, const WeightEntry*> by_name;
  for (const WeightEntry& e : entries) {
    if (!by_name.emplace(e.name, &e).second) {
      fail(ErrorCode::kFormat, "duplicate entry: " + e.name);
    }
  }
  const auto specs = expected_shapes(id);
  for (const WeightSpec& spec : specs) {
    auto it = by_name.find(spec.name);
    if (it == by_name.end()) fail(ErrorCode::kFormat, "missing entry: " + spec.name);
    if (it->second->shape != spec.shape) {
      fail(ErrorCode::kShape, "shape mismatch for " + spec.name + ": got " +
                                  shape_string(it->second->shape) + ", expected " +
                                  shape_string(spec.shape));
    }
  }
  if (specs.size() != entries.size()) {
    for (const WeightEntry& e : entries) {
      const bool known = std::any_of(specs.begin(), specs.end(),
                                     [&](const WeightSpec& s) { return s.name == e.name; });
      if (!known) fail(ErrorCode::kFormat, "unexpected entry: " + e.name);
    }
  }
  for (const WeightEntry& e : entries) {
    if (!is_tau(e.name)) continue;
    for (float t : e.value.data()) {
      if (!(t > kTauFloor)) {
        fail(ErrorCode::kContract, "tau entry " + e.name + " must exceed 0.01");
      }
    }
  }
  const auto n = static_cast<std::size_t>(profile_config(id).n);
  if (z.tables.size() != n) {
    fail(ErrorCode::kFormat, "z prior holds " + std::to_string(z.tables.size()) +
                                 " tables, expected " + std::to_string(n));
  }
}

// Portable uniform draw in [0, 1) from the raw 64-bit engine output.
double unit_draw(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

const Profile& profile_config(ProfileId id) {
  switch (id) {
    case ProfileId::kDesk: return kDesk;
    case ProfileId::kFull: return kFull;
  }
  fail(ErrorCode::kConfig, "unknown profile id " + std::to_string(static_cast<int>(id)));
}

std::optional<ProfileId> parse_profile(std::string_view name) {
  if (name == kDesk.name) return ProfileId::kDesk;
  if (name == kFull.name) return ProfileId::kFull;
  return std::nullopt;
}

int dense_growth(int channels) { return std::max(1, channels / 2); }

std::vector<WeightSpec> expected_shapes(ProfileId id) {
  const Profile& p = profile_config(id);
  if (p.m % p.slices != 0) fail(ErrorCode::kConfig, "slice count must divide latent width");
  return ShapeTable(p).build();
}

ModelWeights::ModelWeights(ProfileId profile, std::vector<WeightEntry> entries,
                           ZPriorTables z_prior)
    : profile_(profile), entries_(std::move(entries)), z_prior_(std::move(z_prior)) {
  for (const WeightEntry& e : entries_) {
    if (e.shape.empty() || e.shape.size() > 4 || e.value.dims() != padded_dims(e.shape)) {
      fail(ErrorCode::kShape, "entry " + e.name + " has inconsistent dims");
    }
  }
  validate(profile_, entries_, z_prior_);
  for (std::size_t i = 0; i < entries_.size(); ++i) index_.emplace(entries_[i].name, i);
  checksum_ = fnv1a64(serialize());
}

bool ModelWeights::contains(std::string_view name) const {
  return index_.count(std::string(name)) != 0;
}

const Tensor& ModelWeights::get(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) fail(ErrorCode::kFormat, "missing entry: " + std::string(name));
  return entries_[it->second].value;
}

Tensor ModelWeights::linear(std::string_view name) const {
  const Tensor& t = get(name);
  return t.reshaped({t.height(), t.width(), 1, 1});
}

std::vector<std::uint8_t> ModelWeights::serialize() const {
  ByteWriter w;
  w.text(kMagic);
  w.u32_le(kVersion);
  w.u32_le(static_cast<std::uint32_t>(entries_.size()));
  for (const WeightEntry& e : entries_) {
    w.u32_le(static_cast<std::uint32_t>(e.name.size()));
    w.text(e.name);
    w.u32_le(static_cast<std::uint32_t>(e.shape.size()));
    for (std::uint32_t d : e.shape) w.u32_le(d);
    for (float v : e.value.data()) w.f32_le(v);
  }
  w.u32_le(static_cast<std::uint32_t>(z_prior_.tables.size()));
  for (const QuantizedCdf& cdf : z_prior_.tables) {
    w.u32_le(static_cast<std::uint32_t>(cdf.radius()));
    for (std::uint32_t c : cdf.cumulative()) w.u32_le(c);
  }
  return w.take();
}

ModelWeights load_weights(std::span<const std::uint8_t> bytes, std::optional<ProfileId> profile) {
  ByteReader r(bytes, "truncated weight archive");
  if (bytes.size() < 4 || r.text(4) != kMagic) fail(ErrorCode::kFormat, "bad weight archive magic");
  const std::uint32_t version = r.u32_le();
  if (version != kVersion) {
    fail(ErrorCode::kFormat, "unsupported weight archive version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32_le();
  std::vector<WeightEntry> entries;
  for (std::uint32_t i = 0; i < count; ++i) {
    WeightEntry e;
    const std::uint32_t name_len = r.u32_le();
    e.name = r.text(name_len);
    const std::uint32_t rank = r.u32_le();
    if (rank == 0 || rank > 4) fail(ErrorCode::kFormat, "entry " + e.name + " has rank " + std::to_string(rank));
    std::uint64_t elements = 1;
    for (std::uint32_t k = 0; k < rank; ++k) {
      e.shape.push_back(r.u32_le());
      elements *= e.shape.back();
    }
    if (elements * 4 > r.remaining()) fail(ErrorCode::kTruncated, "truncated weight archive");
    std::vector<float> data(elements);
    for (float& v : data) v = r.f32_le();
    e.value = Tensor(padded_dims(e.shape), std::move(data));
    entries.push_back(std::move(e));
  }
  ZPriorTables z;
  const std::uint32_t tables = r.u32_le();
  for (std::uint32_t t = 0; t < tables; ++t) {
    const std::uint32_t radius = r.u32_le();
    if (radius > 1u << 15) fail(ErrorCode::kFormat, "z prior radius too large");
    std::vector<std::uint32_t> cum(2 * radius + 3);
    for (std::uint32_t& c : cum) c = r.u32_le();
    z.tables.emplace_back(static_cast<int>(radius), std::move(cum));
  }
  if (r.remaining() != 0) fail(ErrorCode::kFormat, "trailing bytes after weight archive");

  if (!profile) {
    auto it = std::find_if(entries.begin(), entries.end(),
                           [](const WeightEntry& e) { return e.name == "ga.down0.weight"; });
    if (it == entries.end()) fail(ErrorCode::kFormat, "missing entry: ga.down0.weight");
    for (ProfileId id : {ProfileId::kDesk, ProfileId::kFull}) {
      if (it->shape.front() == static_cast<std::uint32_t>(profile_config(id).n)) profile = id;
    }
    if (!profile) fail(ErrorCode::kShape, "weights match no known profile");
  }
  return ModelWeights(*profile, std::move(entries), std::move(z));
}

ModelWeights generate_weights(ProfileId profile, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<WeightEntry> entries;
  for (const WeightSpec& spec : expected_shapes(profile)) {
    Tensor value(padded_dims(spec.shape));
    for (float& v : value.data()) {
      v = static_cast<float>(spec.init_offset + spec.init_scale * (2.0 * unit_draw(rng) - 1.0));
    }
    entries.push_back({spec.name, spec.shape, std::move(value)});
  }
  ZPriorTables z;
  for (int c = 0; c < profile_config(profile).n; ++c) {
    z.tables.push_back(build_cdf(0.0, 0.5 + 2.5 * unit_draw(rng)));
  }
  return ModelWeights(profile, std::move(entries), std::move(z));
}

}  // namespace s2lc
