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

#include "s2lc/s2lc.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>

#include "codec.hpp"
#include "error.hpp"
#include "image.hpp"
#include "metrics.hpp"
#include "weights.hpp"

struct s2lc_weights {
  s2lc::ModelWeights value;
};

struct s2lc_image {
  s2lc::Image value;
};

namespace {

thread_local std::string g_last_error;

s2lc_status status_for(s2lc::ErrorCode code) {
  using s2lc::ErrorCode;
  switch (code) {
    case ErrorCode::kShape: return S2LC_ERR_SHAPE;
    case ErrorCode::kConfig: return S2LC_ERR_CONFIG;
    case ErrorCode::kFormat: return S2LC_ERR_FORMAT;
    case ErrorCode::kTruncated: return S2LC_ERR_TRUNCATED;
    case ErrorCode::kChecksum: return S2LC_ERR_CHECKSUM;
    case ErrorCode::kContract: return S2LC_ERR_CONTRACT;
    case ErrorCode::kDomain: return S2LC_ERR_DOMAIN;
    case ErrorCode::kIo: return S2LC_ERR_IO;
  }
  return S2LC_ERR_INTERNAL;
}

s2lc_status set_error(s2lc_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
s2lc_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return S2LC_OK;
  } catch (const s2lc::Error& e) {
    return set_error(status_for(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(S2LC_ERR_MEMORY, "out of memory");
  } catch (const std::exception& e) {
    return set_error(S2LC_ERR_INTERNAL, e.what());
  }
}

std::optional<s2lc::ProfileId> to_profile(int profile) {
  if (profile == S2LC_PROFILE_ANY) return std::nullopt;
  if (profile == S2LC_PROFILE_DESK) return s2lc::ProfileId::kDesk;
  if (profile == S2LC_PROFILE_FULL) return s2lc::ProfileId::kFull;
  s2lc::fail(s2lc::ErrorCode::kConfig, "unknown profile id " + std::to_string(profile));
}

void fill_buffer(s2lc_buffer* out, const std::vector<std::uint8_t>& bytes) {
  out->data = nullptr;
  out->size = bytes.size();
  if (!bytes.empty()) {
    out->data = new std::uint8_t[bytes.size()];
    std::memcpy(out->data, bytes.data(), bytes.size());
  }
}

#define S2LC_REQUIRE(cond)                                                \
  do {                                                                    \
    if (!(cond)) return set_error(S2LC_ERR_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* s2lc_last_error(void) { return g_last_error.c_str(); }

const char* s2lc_status_name(s2lc_status status) {
  switch (status) {
    case S2LC_OK: return "ok";
    case S2LC_ERR_ARGUMENT: return "invalid argument";
    case S2LC_ERR_SHAPE: return "shape mismatch";
    case S2LC_ERR_CONFIG: return "configuration mismatch";
    case S2LC_ERR_FORMAT: return "format error";
    case S2LC_ERR_TRUNCATED: return "truncated stream";
    case S2LC_ERR_CHECKSUM: return "checksum mismatch";
    case S2LC_ERR_CONTRACT: return "contract violation";
    case S2LC_ERR_DOMAIN: return "domain error";
    case S2LC_ERR_IO: return "i/o error";
    case S2LC_ERR_MEMORY: return "out of memory";
    case S2LC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

void s2lc_buffer_free(s2lc_buffer* buffer) {
  if (!buffer) return;
  delete[] buffer->data;
  buffer->data = nullptr;
  buffer->size = 0;
}

s2lc_status s2lc_profile_parse(const char* name, int* profile) {
  S2LC_REQUIRE(name && profile);
  const auto id = s2lc::parse_profile(name);
  if (!id) return set_error(S2LC_ERR_CONFIG, std::string("unknown profile '") + name + "'");
  *profile = static_cast<int>(*id);
  return S2LC_OK;
}

s2lc_status s2lc_weights_generate(int profile, uint64_t seed, s2lc_weights** out) {
  S2LC_REQUIRE(out);
  *out = nullptr;
  return guarded([&] {
    const auto id = to_profile(profile);
    if (!id) s2lc::fail(s2lc::ErrorCode::kConfig, "generation needs an explicit profile");
    *out = new s2lc_weights{s2lc::generate_weights(*id, seed)};
  });
}

s2lc_status s2lc_weights_load(const uint8_t* data, size_t size, int profile, s2lc_weights** out) {
  S2LC_REQUIRE(out && (data || size == 0));
  *out = nullptr;
  return guarded([&] {
    *out = new s2lc_weights{s2lc::load_weights({data, size}, to_profile(profile))};
  });
}

s2lc_status s2lc_weights_load_file(const char* path, int profile, s2lc_weights** out) {
  S2LC_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] {
    const auto bytes = s2lc::read_file(path);
    *out = new s2lc_weights{s2lc::load_weights(bytes, to_profile(profile))};
  });
}

s2lc_status s2lc_weights_serialize(const s2lc_weights* weights, s2lc_buffer* out) {
  S2LC_REQUIRE(weights && out);
  return guarded([&] { fill_buffer(out, weights->value.serialize()); });
}

s2lc_status s2lc_weights_profile(const s2lc_weights* weights, int* profile) {
  S2LC_REQUIRE(weights && profile);
  *profile = static_cast<int>(weights->value.profile_id());
  return S2LC_OK;
}

uint64_t s2lc_weights_checksum(const s2lc_weights* weights) {
  return weights ? weights->value.checksum() : 0;
}

void s2lc_weights_free(s2lc_weights* weights) { delete weights; }

s2lc_status s2lc_image_create(uint32_t width, uint32_t height, const uint8_t* rgb,
                              s2lc_image** out) {
  S2LC_REQUIRE(out && rgb && width > 0 && height > 0);
  *out = nullptr;
  return guarded([&] {
    s2lc::Image img{width, height, {}};
    img.rgb.assign(rgb, rgb + std::size_t{width} * height * 3);
    *out = new s2lc_image{std::move(img)};
  });
}

s2lc_status s2lc_image_parse_ppm(const uint8_t* data, size_t size, s2lc_image** out) {
  S2LC_REQUIRE(out && (data || size == 0));
  *out = nullptr;
  return guarded([&] { *out = new s2lc_image{s2lc::parse_ppm({data, size})}; });
}

s2lc_status s2lc_image_read_ppm(const char* path, s2lc_image** out) {
  S2LC_REQUIRE(path && out);
  *out = nullptr;
  return guarded([&] { *out = new s2lc_image{s2lc::parse_ppm(s2lc::read_file(path))}; });
}

s2lc_status s2lc_image_write_ppm(const s2lc_image* image, const char* path) {
  S2LC_REQUIRE(image && path);
  return guarded([&] { s2lc::write_file(path, s2lc::format_ppm(image->value)); });
}

uint32_t s2lc_image_width(const s2lc_image* image) { return image ? image->value.width : 0; }
uint32_t s2lc_image_height(const s2lc_image* image) { return image ? image->value.height : 0; }
const uint8_t* s2lc_image_pixels(const s2lc_image* image) {
  return image ? image->value.rgb.data() : nullptr;
}

void s2lc_image_free(s2lc_image* image) { delete image; }

s2lc_status s2lc_encode(const s2lc_weights* weights, const s2lc_image* image, int profile,
                        s2lc_buffer* stream, s2lc_encode_stats* stats) {
  S2LC_REQUIRE(weights && image && stream);
  return guarded([&] {
    s2lc::EncodeOptions options;
    options.profile = to_profile(profile);
    options.reconstruct = stats != nullptr;
    const auto result = s2lc::encode_image(image->value, weights->value, options);
    const auto bytes = result.container.serialize();
    if (stats) {
      const std::uint64_t pixels = std::uint64_t{image->value.width} * image->value.height;
      stats->stream_bytes = bytes.size();
      stats->bpp = s2lc::bits_per_pixel(8.0 * static_cast<double>(bytes.size()), pixels);
      stats->mse = s2lc::mse(image->value, result.reconstruction);
      stats->psnr = s2lc::psnr(image->value, result.reconstruction);
    }
    fill_buffer(stream, bytes);
  });
}

s2lc_status s2lc_decode(const s2lc_weights* weights, const uint8_t* stream, size_t size,
                        s2lc_image** out) {
  S2LC_REQUIRE(weights && out && (stream || size == 0));
  *out = nullptr;
  return guarded([&] {
    const auto container = s2lc::BitstreamContainer::parse({stream, size});
    *out = new s2lc_image{s2lc::decode_image(container, weights->value).image};
  });
}

s2lc_status s2lc_stream_profile(const uint8_t* stream, size_t size, int* profile) {
  S2LC_REQUIRE(profile && (stream || size == 0));
  return guarded([&] {
    *profile = static_cast<int>(s2lc::BitstreamContainer::parse({stream, size}).profile);
  });
}

s2lc_status s2lc_inspect(const s2lc_weights* weights, const uint8_t* stream, size_t size,
                         s2lc_buffer* pgm) {
  S2LC_REQUIRE(weights && pgm && (stream || size == 0));
  return guarded([&] {
    const auto container = s2lc::BitstreamContainer::parse({stream, size});
    s2lc::LatentTrace trace;
    s2lc::decode_latents(container, weights->value, trace);
    const auto map = s2lc::latent_map(trace.y_hat);
    fill_buffer(pgm, s2lc::format_pgm(map.width, map.height, map.pixels));
  });
}

s2lc_status s2lc_mse(const s2lc_image* a, const s2lc_image* b, double* out) {
  S2LC_REQUIRE(a && b && out);
  return guarded([&] { *out = s2lc::mse(a->value, b->value); });
}

s2lc_status s2lc_psnr(const s2lc_image* a, const s2lc_image* b, double* out) {
  S2LC_REQUIRE(a && b && out);
  return guarded([&] { *out = s2lc::psnr(a->value, b->value); });
}

s2lc_status s2lc_rd_loss(double rate_bits, uint64_t pixels, double mse, double lambda, double* bpp,
                         double* loss) {
  S2LC_REQUIRE(bpp && loss);
  return guarded([&] {
    const auto r = s2lc::rd_loss(rate_bits, pixels, mse, lambda);
    *bpp = r.bpp;
    *loss = r.loss;
  });
}

size_t s2lc_lambda_presets(const double** out) {
  if (out) *out = s2lc::kLambdaPresets.data();
  return s2lc::kLambdaPresets.size();
}

s2lc_status s2lc_bd_rate(const s2lc_rd_point* anchor, size_t anchor_count,
                         const s2lc_rd_point* test, size_t test_count, double* percent) {
  S2LC_REQUIRE(anchor && test && percent);
  return guarded([&] {
    std::vector<s2lc::RdPoint> a, b;
    for (size_t i = 0; i < anchor_count; ++i) a.push_back({anchor[i].bpp, anchor[i].psnr});
    for (size_t i = 0; i < test_count; ++i) b.push_back({test[i].bpp, test[i].psnr});
    *percent = s2lc::bd_rate(a, b);
  });
}

}  // extern "C"
