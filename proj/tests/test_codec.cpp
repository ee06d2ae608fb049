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

#include <functional>
#include <thread>

#include "codec.hpp"
#include "error.hpp"
#include "support.hpp"

using namespace s2lc;
using s2lc::testing::Gen;

namespace {

const ModelWeights& desk() {
  static const ModelWeights w = generate_weights(ProfileId::kDesk, 7);
  return w;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("container: serialize and parse are inverse") {
  BitstreamContainer c;
  c.width = 300;
  c.height = 7;
  c.profile = ProfileId::kDesk;
  c.checksum = 0x0123456789abcdefULL;
  c.z_stream = {1, 2, 3};
  for (int i = 0; i < 4; ++i) c.slices.push_back({{static_cast<std::uint8_t>(i)}, {9, 9}});
  const auto bytes = c.serialize();
  CHECK(bytes[0] == 'S');
  CHECK(bytes[4] == 0);
  CHECK(bytes[5] == 1);  // version, big-endian
  const BitstreamContainer back = BitstreamContainer::parse(bytes);
  CHECK(back == c);
  CHECK(back.serialize() == bytes);

  auto trailing = bytes;
  trailing.push_back(0);
  CHECK(code_of([&] { BitstreamContainer::parse(trailing); }) == ErrorCode::kFormat);
  auto magic = bytes;
  magic[0] = 'X';
  CHECK(code_of([&] { BitstreamContainer::parse(magic); }) == ErrorCode::kFormat);
  for (std::size_t cut : {std::size_t{3}, std::size_t{20}, bytes.size() - 1}) {
    const std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    CHECK(code_of([&] { BitstreamContainer::parse(part); }) == ErrorCode::kTruncated);
  }
}

TEST_CASE("encode: stream structure and rate accounting") {
  Gen g(71);
  const Image img = g.image(64, 64);
  const EncodeResult r = encode_image(img, desk());
  CHECK(r.container.slices.size() == 4);
  CHECK_FALSE(r.container.z_stream.empty());
  for (const auto& s : r.container.slices) {
    CHECK(s.anchor.size() >= 8);
    CHECK(s.non_anchor.size() >= 8);
  }
  CHECK(r.trace.y_hat.dims() == Tensor::Dims{1, 32, 4, 4});
  CHECK(r.trace.anchor_symbols[0].size() == 8 * 8);
  CHECK(r.container.checksum == desk().checksum());
}

TEST_CASE("encode: tiny images pad up and crop back") {
  Gen g(72);
  const Image img = g.image(1, 1);
  const EncodeResult r = encode_image(img, desk());
  CHECK(r.container.width == 1);
  CHECK(r.container.height == 1);
  CHECK(r.trace.y_hat.dims() == Tensor::Dims{1, 32, 4, 4});
  const DecodeResult d = decode_image(BitstreamContainer::parse(r.container.serialize()), desk());
  CHECK(d.image.width == 1);
  CHECK(d.image.height == 1);
  CHECK(d.image == r.reconstruction);
}

TEST_CASE("round trip: decoder latents match the encoder bit for bit") {
  Gen g(73);
  for (int trial = 0; trial < 20; ++trial) {
    const auto w = static_cast<std::uint32_t>(g.integer(1, 90));
    const auto h = static_cast<std::uint32_t>(g.integer(1, 90));
    const Image img = g.image(w, h);
    const EncodeResult r = encode_image(img, desk());
    const DecodeResult d = decode_image(BitstreamContainer::parse(r.container.serialize()), desk());
    CHECK(d.image.width == w);
    CHECK(d.image.height == h);
    CHECK(bitwise_equal(d.trace.y_hat, r.trace.y_hat));
    CHECK(d.trace.z_symbols == r.trace.z_symbols);
    CHECK(d.trace.anchor_symbols == r.trace.anchor_symbols);
    CHECK(d.trace.non_anchor_symbols == r.trace.non_anchor_symbols);
    CHECK(d.image == r.reconstruction);
  }
}

TEST_CASE("decode: rejects foreign weights, profiles and truncation") {
  Gen g(74);
  const EncodeResult r = encode_image(g.image(20, 30), desk(), {.reconstruct = false});
  const ModelWeights other = generate_weights(ProfileId::kDesk, 8);
  CHECK(code_of([&] { decode_image(r.container, other); }) == ErrorCode::kChecksum);
  CHECK(code_of([&] { encode_image(g.image(4, 4), desk(), {.profile = ProfileId::kFull}); }) ==
        ErrorCode::kConfig);

  BitstreamContainer cut = r.container;
  cut.slices[1].anchor.resize(3);
  try {
    decode_image(cut, desk());
    FAIL("expected truncation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kTruncated);
    CHECK(std::string(e.what()) == "truncated stream");
  }
}

TEST_CASE("decode: damage to a non-anchor stream stays out of the anchors") {
  Gen g(75);
  const EncodeResult r = encode_image(g.image(70, 50), desk(), {.reconstruct = false});
  for (int trial = 0; trial < 5; ++trial) {
    BitstreamContainer bad = r.container;
    auto& stream = bad.slices.back().non_anchor;
    const std::size_t begin = g.integer(0, static_cast<int>(stream.size()) - 1);
    for (std::size_t i = begin; i < std::min(stream.size(), begin + 4); ++i) stream[i] ^= 0x5A;
    LatentTrace t;
    try {
      decode_latents(bad, desk(), t);
    } catch (const Error&) {
      // running off the end of a damaged stream is fine; the trace is partial
    }
    REQUIRE(t.anchor_symbols.size() == 4);
    CHECK(t.anchor_symbols == r.trace.anchor_symbols);
    for (std::size_t i = 0; i + 1 < 4; ++i) {
      CHECK(t.non_anchor_symbols[i] == r.trace.non_anchor_symbols[i]);
      CHECK(bitwise_equal(t.slices[i], r.trace.slices[i]));
    }
  }
}

TEST_CASE("concurrent jobs over shared weights agree") {
  Gen g(76);
  const Image img = g.image(40, 33);
  const auto ref = encode_image(img, desk()).container.serialize();
  std::vector<std::vector<std::uint8_t>> out(3);
  std::vector<std::thread> jobs;
  for (auto& o : out) jobs.emplace_back([&o, &img] { o = encode_image(img, desk()).container.serialize(); });
  for (auto& j : jobs) j.join();
  for (const auto& o : out) CHECK(o == ref);
}
