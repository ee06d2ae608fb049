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

#include "codec.hpp"

#include <bit>
#include <string>
#include <unordered_map>

#include "bytes.hpp"
#include "coder.hpp"
#include "entropy_model.hpp"
#include "error.hpp"
#include "transforms.hpp"

namespace s2lc {
namespace {

constexpr char kMagic[] = "S2LC";

void check_profile(ProfileId stream, const ModelWeights& w) {
  if (stream != w.profile_id()) {
    fail(ErrorCode::kConfig, "profile " + std::string(profile_config(stream).name) +
                                 " does not match the " + std::string(w.profile().name) +
                                 " weights");
  }
}

// Flat indices of one checkerboard parity, channel-major then row then col.
std::vector<std::size_t> pass_positions(const Tensor::Dims& d, CheckerPart part) {
  std::vector<std::size_t> pos;
  const bool anchor = part == CheckerPart::kAnchor;
  for (std::size_t c = 0; c < d[1]; ++c)
    for (std::size_t y = 0; y < d[2]; ++y)
      for (std::size_t x = 0; x < d[3]; ++x) {
        if (CheckerboardMask::is_anchor(y, x) == anchor) pos.push_back((c * d[2] + y) * d[3] + x);
      }
  return pos;
}

// One table per distinct scale value.
struct PassTables {
  std::vector<QuantizedCdf> tables;
  std::vector<std::uint32_t> index;
};

PassTables pass_tables(const Tensor& scale, std::span<const std::size_t> positions) {
  PassTables out;
  std::unordered_map<std::uint32_t, std::uint32_t> seen;
  const auto s = scale.data();
  for (std::size_t p : positions) {
    const auto key = std::bit_cast<std::uint32_t>(s[p]);
    auto [it, fresh] = seen.try_emplace(key, static_cast<std::uint32_t>(out.tables.size()));
    if (fresh) out.tables.push_back(build_cdf(0.0, s[p]));
    out.index.push_back(it->second);
  }
  return out;
}

std::vector<std::uint8_t> encode_pass(const Tensor& y, const EntropyParams& params, CheckerPart part,
                                      Tensor& y_hat, std::vector<std::int32_t>& symbols) {
  const auto positions = pass_positions(y.dims(), part);
  const auto mean = params.mean.data();
  const auto src = y.data();
  auto dst = y_hat.data();
  symbols.clear();
  for (std::size_t p : positions) {
    const std::int32_t s = round_symbol(static_cast<double>(src[p]) - mean[p]);
    symbols.push_back(s);
    dst[p] = static_cast<float>(static_cast<double>(s) + mean[p]);
  }
  const PassTables t = pass_tables(params.scale, positions);
  return encode_symbols(symbols, t.tables, t.index);
}

void decode_pass(std::span<const std::uint8_t> bytes, const EntropyParams& params,
                 CheckerPart part, Tensor& y_hat, std::vector<std::int32_t>& symbols) {
  const auto positions = pass_positions(y_hat.dims(), part);
  const PassTables t = pass_tables(params.scale, positions);
  symbols = decode_symbols(bytes, positions.size(), t.tables, t.index);
  const auto mean = params.mean.data();
  auto dst = y_hat.data();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    dst[positions[i]] = static_cast<float>(static_cast<double>(symbols[i]) + mean[positions[i]]);
  }
}

Tensor round_tensor(const Tensor& t, std::vector<std::int32_t>& symbols) {
  Tensor out = t;
  symbols.clear();
  for (float& v : out.data()) {
    const std::int32_t s = round_symbol(v);
    symbols.push_back(s);
    v = static_cast<float>(s);
  }
  return out;
}

Tensor::Dims latent_dims(const Profile& p, std::uint32_t width, std::uint32_t height) {
  return {1, static_cast<std::size_t>(p.m), padded_side(height) / 16, padded_side(width) / 16};
}

Tensor::Dims hyper_dims(const Profile& p, std::uint32_t width, std::uint32_t height) {
  return {1, static_cast<std::size_t>(p.n), padded_side(height) / 64, padded_side(width) / 64};
}

void finish_trace(LatentTrace& trace) { trace.y_hat = concat_channels(trace.slices); }

}  // namespace

std::uint32_t padded_side(std::uint32_t side) {
  if (side == 0) fail(ErrorCode::kShape, "image side must be at least 1");
  return (side + kPadMultiple - 1) / kPadMultiple * kPadMultiple;
}

std::vector<std::uint8_t> BitstreamContainer::serialize() const {
  ByteWriter w;
  w.text(kMagic);
  w.u16_be(version);
  w.u32_be(width);
  w.u32_be(height);
  w.u8(static_cast<std::uint8_t>(profile));
  w.u64_be(checksum);
  w.u32_be(static_cast<std::uint32_t>(z_stream.size()));
  w.raw(z_stream);
  for (const SliceStreams& s : slices) {
    w.u32_be(static_cast<std::uint32_t>(s.anchor.size()));
    w.raw(s.anchor);
    w.u32_be(static_cast<std::uint32_t>(s.non_anchor.size()));
    w.raw(s.non_anchor);
  }
  return w.take();
}

BitstreamContainer BitstreamContainer::parse(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes, "truncated stream");
  if (r.text(4) != kMagic) fail(ErrorCode::kFormat, "bad magic: not an s2lc stream");
  BitstreamContainer c;
  c.version = r.u16_be();
  if (c.version != kFormatVersion) {
    fail(ErrorCode::kFormat, "unsupported stream version " + std::to_string(c.version));
  }
  c.width = r.u32_be();
  c.height = r.u32_be();
  if (c.width == 0 || c.height == 0) fail(ErrorCode::kFormat, "stream declares a zero side");
  const std::uint8_t profile = r.u8();
  if (profile > static_cast<std::uint8_t>(ProfileId::kFull)) {
    fail(ErrorCode::kFormat, "unknown profile id " + std::to_string(profile));
  }
  c.profile = static_cast<ProfileId>(profile);
  c.checksum = r.u64_be();
  auto block = [&r] {
    const std::uint32_t n = r.u32_be();
    auto s = r.raw(n);
    return std::vector<std::uint8_t>(s.begin(), s.end());
  };
  c.z_stream = block();
  c.slices.resize(static_cast<std::size_t>(profile_config(c.profile).slices));
  for (SliceStreams& s : c.slices) {
    s.anchor = block();
    s.non_anchor = block();
  }
  if (r.remaining() != 0) fail(ErrorCode::kFormat, "trailing bytes after the last slice");
  return c;
}

EncodeResult encode_image(const Image& image, const ModelWeights& weights,
                          const EncodeOptions& options) {
  if (image.width == 0 || image.height == 0 ||
      image.rgb.size() != std::size_t{image.width} * image.height * 3) {
    fail(ErrorCode::kShape, "encode_image: malformed input image");
  }
  if (options.profile) check_profile(*options.profile, weights);
  const Profile& profile = weights.profile();

  EncodeResult result;
  BitstreamContainer& c = result.container;
  c.width = image.width;
  c.height = image.height;
  c.profile = weights.profile_id();
  c.checksum = weights.checksum();

  const Tensor x = pad_replicate(image_to_tensor(image), padded_side(image.height),
                                 padded_side(image.width));
  const Tensor y = analysis_transform(x, weights);
  const Tensor z = hyper_analysis(y, weights);
  LatentTrace& trace = result.trace;
  const Tensor z_hat = round_tensor(z, trace.z_symbols);
  c.z_stream = code_z(z_hat, weights.z_prior());
  const Tensor phi_hs = hyper_synthesis(z_hat, weights);

  const auto y_slices = split_slices(y, SliceLayout::even(profile.m, profile.slices));
  trace.anchor_symbols.resize(y_slices.size());
  trace.non_anchor_symbols.resize(y_slices.size());
  for (std::size_t i = 0; i < y_slices.size(); ++i) {
    const SliceParams params = bind_slice(weights, static_cast<int>(i));
    const SliceContext ctx =
        prepare_slice_context(phi_hs, trace.slices, params, profile.context_width());
    Tensor y_hat(y_slices[i].dims());
    SliceStreams streams;
    streams.anchor = encode_pass(y_slices[i], anchor_parameters(ctx, params), CheckerPart::kAnchor,
                                 y_hat, trace.anchor_symbols[i]);
    streams.non_anchor =
        encode_pass(y_slices[i], non_anchor_parameters(ctx, y_hat, params),
                    CheckerPart::kNonAnchor, y_hat, trace.non_anchor_symbols[i]);
    c.slices.push_back(std::move(streams));
    trace.slices.push_back(add(y_hat, slice_correction(ctx, y_hat, params)));
  }
  finish_trace(trace);

  if (options.reconstruct) {
    result.reconstruction = tensor_to_image(
        crop(synthesis_transform(trace.y_hat, weights), image.height, image.width));
  }
  return result;
}

void decode_latents(const BitstreamContainer& c, const ModelWeights& weights, LatentTrace& trace) {
  check_profile(c.profile, weights);
  if (c.checksum != weights.checksum()) {
    fail(ErrorCode::kChecksum, "weights checksum does not match the stream");
  }
  const Profile& profile = weights.profile();
  if (c.slices.size() != static_cast<std::size_t>(profile.slices)) {
    fail(ErrorCode::kFormat, "stream has " + std::to_string(c.slices.size()) + " slices, expected " +
                                 std::to_string(profile.slices));
  }
  trace = LatentTrace{};
  const Tensor z_hat = decode_z(c.z_stream, hyper_dims(profile, c.width, c.height), weights.z_prior());
  for (float v : z_hat.data()) trace.z_symbols.push_back(static_cast<std::int32_t>(v));
  const Tensor phi_hs = hyper_synthesis(z_hat, weights);

  Tensor::Dims slice_dims = latent_dims(profile, c.width, c.height);
  slice_dims[1] = static_cast<std::size_t>(profile.slice_width());
  for (std::size_t i = 0; i < c.slices.size(); ++i) {
    const SliceParams params = bind_slice(weights, static_cast<int>(i));
    const SliceContext ctx =
        prepare_slice_context(phi_hs, trace.slices, params, profile.context_width());
    Tensor y_hat(slice_dims);
    trace.anchor_symbols.emplace_back();
    decode_pass(c.slices[i].anchor, anchor_parameters(ctx, params), CheckerPart::kAnchor, y_hat,
                trace.anchor_symbols.back());
    trace.non_anchor_symbols.emplace_back();
    decode_pass(c.slices[i].non_anchor, non_anchor_parameters(ctx, y_hat, params),
                CheckerPart::kNonAnchor, y_hat, trace.non_anchor_symbols.back());
    trace.slices.push_back(add(y_hat, slice_correction(ctx, y_hat, params)));
  }
  finish_trace(trace);
}

DecodeResult decode_image(const BitstreamContainer& container, const ModelWeights& weights) {
  DecodeResult out;
  decode_latents(container, weights, out.trace);
  out.image = tensor_to_image(
      crop(synthesis_transform(out.trace.y_hat, weights), container.height, container.width));
  return out;
}

std::vector<SliceParameters> slice_parameters(const Tensor& phi_hs,
                                              std::span<const Tensor> y_hat_slices,
                                              const ModelWeights& weights) {
  const Profile& profile = weights.profile();
  std::vector<SliceParameters> out;
  for (std::size_t i = 0; i < y_hat_slices.size(); ++i) {
    const SliceParams params = bind_slice(weights, static_cast<int>(i));
    const SliceContext ctx = prepare_slice_context(phi_hs, y_hat_slices.first(i), params,
                                                   profile.context_width());
    const EntropyParams a = anchor_parameters(ctx, params);
    const EntropyParams n = non_anchor_parameters(ctx, y_hat_slices[i], params);
    out.push_back({a.mean, a.scale, n.mean, n.scale});
  }
  return out;
}

}  // namespace s2lc
