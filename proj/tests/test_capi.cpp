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

#include <cstring>
#include <string>
#include <vector>

#include "s2lc/s2lc.h"

namespace {

std::vector<uint8_t> pattern(uint32_t w, uint32_t h) {
  std::vector<uint8_t> rgb(std::size_t{w} * h * 3);
  for (std::size_t i = 0; i < rgb.size(); ++i) rgb[i] = static_cast<uint8_t>((i * 37) ^ (i >> 3));
  return rgb;
}

}  // namespace

TEST_CASE("C API: encode, decode and stats") {
  s2lc_weights* w = nullptr;
  REQUIRE(s2lc_weights_generate(S2LC_PROFILE_DESK, 7, &w) == S2LC_OK);
  int profile = -5;
  CHECK(s2lc_weights_profile(w, &profile) == S2LC_OK);
  CHECK(profile == S2LC_PROFILE_DESK);

  const auto rgb = pattern(37, 21);
  s2lc_image* img = nullptr;
  REQUIRE(s2lc_image_create(37, 21, rgb.data(), &img) == S2LC_OK);

  s2lc_buffer stream{};
  s2lc_encode_stats stats{};
  REQUIRE(s2lc_encode(w, img, S2LC_PROFILE_ANY, &stream, &stats) == S2LC_OK);
  CHECK(stats.stream_bytes == stream.size);
  CHECK(stats.bpp == doctest::Approx(8.0 * stream.size / (37 * 21)));

  int stream_profile = -1;
  CHECK(s2lc_stream_profile(stream.data, stream.size, &stream_profile) == S2LC_OK);
  CHECK(stream_profile == S2LC_PROFILE_DESK);

  s2lc_image* out = nullptr;
  REQUIRE(s2lc_decode(w, stream.data, stream.size, &out) == S2LC_OK);
  CHECK(s2lc_image_width(out) == 37);
  CHECK(s2lc_image_height(out) == 21);
  double psnr = 0;
  CHECK(s2lc_psnr(img, out, &psnr) == S2LC_OK);
  CHECK(psnr == doctest::Approx(stats.psnr));

  s2lc_buffer pgm{};
  REQUIRE(s2lc_inspect(w, stream.data, stream.size, &pgm) == S2LC_OK);
  CHECK(std::string(reinterpret_cast<const char*>(pgm.data), 8) == "P5\n4 4\n2");

  // Truncation surfaces as a status plus message.
  CHECK(s2lc_decode(w, stream.data, stream.size - 5, &out) == S2LC_ERR_TRUNCATED);
  CHECK(std::string(s2lc_last_error()) == "truncated stream");
  CHECK(out == nullptr);

  s2lc_buffer_free(&pgm);
  s2lc_buffer_free(&stream);
  CHECK(stream.data == nullptr);
  s2lc_image_free(img);
  s2lc_weights_free(w);
}

TEST_CASE("C API: archives round trip and checksums gate decoding") {
  s2lc_weights* a = nullptr;
  s2lc_weights* b = nullptr;
  REQUIRE(s2lc_weights_generate(S2LC_PROFILE_DESK, 1, &a) == S2LC_OK);
  REQUIRE(s2lc_weights_generate(S2LC_PROFILE_DESK, 2, &b) == S2LC_OK);
  CHECK(s2lc_weights_checksum(a) != s2lc_weights_checksum(b));

  s2lc_buffer archive{};
  REQUIRE(s2lc_weights_serialize(a, &archive) == S2LC_OK);
  s2lc_weights* again = nullptr;
  REQUIRE(s2lc_weights_load(archive.data, archive.size, S2LC_PROFILE_ANY, &again) == S2LC_OK);
  CHECK(s2lc_weights_checksum(again) == s2lc_weights_checksum(a));
  s2lc_weights* wrong = nullptr;
  CHECK(s2lc_weights_load(archive.data, archive.size, S2LC_PROFILE_FULL, &wrong) != S2LC_OK);
  CHECK(wrong == nullptr);

  const auto rgb = pattern(8, 8);
  s2lc_image* img = nullptr;
  REQUIRE(s2lc_image_create(8, 8, rgb.data(), &img) == S2LC_OK);
  s2lc_buffer stream{};
  REQUIRE(s2lc_encode(a, img, S2LC_PROFILE_DESK, &stream, nullptr) == S2LC_OK);
  s2lc_image* out = nullptr;
  CHECK(s2lc_decode(b, stream.data, stream.size, &out) == S2LC_ERR_CHECKSUM);
  CHECK(s2lc_encode(a, img, S2LC_PROFILE_FULL, &stream, nullptr) == S2LC_ERR_CONFIG);

  s2lc_buffer_free(&stream);
  s2lc_buffer_free(&archive);
  s2lc_image_free(img);
  s2lc_weights_free(again);
  s2lc_weights_free(a);
  s2lc_weights_free(b);
}

TEST_CASE("C API: argument checks and metrics") {
  CHECK(s2lc_weights_generate(S2LC_PROFILE_DESK, 0, nullptr) == S2LC_ERR_ARGUMENT);
  int id = -1;
  CHECK(s2lc_profile_parse("full", &id) == S2LC_OK);
  CHECK(id == S2LC_PROFILE_FULL);
  CHECK(s2lc_profile_parse("huge", &id) == S2LC_ERR_CONFIG);

  const double* presets = nullptr;
  CHECK(s2lc_lambda_presets(&presets) == 6);
  CHECK(presets[0] == 0.0018);

  double bpp = 0, loss = 0;
  CHECK(s2lc_rd_loss(2048, 1024, 10, 0.01, &bpp, &loss) == S2LC_OK);
  CHECK(bpp == 2.0);
  CHECK(loss == doctest::Approx(2.1));

  const s2lc_rd_point a[] = {{0.1, 30}, {0.2, 32}, {0.4, 34}, {0.8, 36}};
  s2lc_rd_point b[4];
  std::memcpy(b, a, sizeof a);
  for (auto& p : b) p.bpp *= 2;
  double pct = 0;
  CHECK(s2lc_bd_rate(a, 4, b, 4, &pct) == S2LC_OK);
  CHECK(pct == doctest::Approx(100.0));
  CHECK(s2lc_bd_rate(a, 3, b, 4, &pct) == S2LC_ERR_DOMAIN);
  CHECK(std::string(s2lc_status_name(S2LC_ERR_TRUNCATED)) == "truncated stream");
}
