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

#include "image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "error.hpp"

namespace s2lc {
namespace {

class HeaderScanner {
 public:
  explicit HeaderScanner(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::string magic() {
    if (bytes_.size() < 2) fail(ErrorCode::kTruncated, "truncated image header");
    pos_ = 2;
    return {static_cast<char>(bytes_[0]), static_cast<char>(bytes_[1])};
  }

  std::uint32_t number() {
    skip_space();
    std::uint64_t v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 0xFFFFFFFFu) fail(ErrorCode::kFormat, "image header value overflows");
      ++digits;
    }
    if (digits == 0) {
      fail(pos_ >= bytes_.size() ? ErrorCode::kTruncated : ErrorCode::kFormat,
           "malformed image header");
    }
    return static_cast<std::uint32_t>(v);
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      fail(ErrorCode::kFormat, "malformed image header");
    }
    return pos_ + 1;
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::uint8_t> with_header(const std::string& header, std::span<const std::uint8_t> body) {
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

}  // namespace

Image parse_ppm(std::span<const std::uint8_t> bytes) {
  HeaderScanner scan(bytes);
  if (scan.magic() != "P6") fail(ErrorCode::kFormat, "not a binary PPM (P6)");
  Image img;
  img.width = scan.number();
  img.height = scan.number();
  const std::uint32_t maxval = scan.number();
  if (maxval != 255) fail(ErrorCode::kFormat, "only 8-bit PPM (maxval 255) is supported");
  if (img.width == 0 || img.height == 0) fail(ErrorCode::kFormat, "PPM has a zero side");
  const std::size_t start = scan.raster_start();
  const std::size_t need = std::size_t{img.width} * img.height * 3;
  if (bytes.size() - std::min(start, bytes.size()) < need) {
    fail(ErrorCode::kTruncated, "truncated PPM raster");
  }
  img.rgb.assign(bytes.begin() + start, bytes.begin() + start + need);
  return img;
}

std::vector<std::uint8_t> format_ppm(const Image& image) {
  if (image.rgb.size() != std::size_t{image.width} * image.height * 3) {
    fail(ErrorCode::kShape, "image buffer does not match its dims");
  }
  return with_header("P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                         "\n255\n",
                     image.rgb);
}

std::vector<std::uint8_t> format_pgm(std::uint32_t width, std::uint32_t height,
                                     std::span<const std::uint8_t> gray) {
  if (gray.size() != std::size_t{width} * height) {
    fail(ErrorCode::kShape, "gray buffer does not match its dims");
  }
  return with_header("P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n",
                     gray);
}

Tensor image_to_tensor(const Image& image) {
  Tensor t({1, 3, image.height, image.width});
  for (std::size_t y = 0; y < image.height; ++y)
    for (std::size_t x = 0; x < image.width; ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        t.at(0, c, y, x) = image.rgb[(y * image.width + x) * 3 + c] / 255.0f;
      }
  return t;
}

Image tensor_to_image(const Tensor& t) {
  if (t.batch() != 1 || t.channels() != 3) {
    fail(ErrorCode::kShape, "tensor_to_image expects (1, 3, H, W), got " + to_string(t.dims()));
  }
  Image img{static_cast<std::uint32_t>(t.width()), static_cast<std::uint32_t>(t.height()), {}};
  img.rgb.resize(t.height() * t.width() * 3);
  for (std::size_t y = 0; y < t.height(); ++y)
    for (std::size_t x = 0; x < t.width(); ++x)
      for (std::size_t c = 0; c < 3; ++c) {
        double v = t.at(0, c, y, x);
        if (std::isnan(v)) v = 0;
        v = std::clamp(v, 0.0, 1.0);
        img.rgb[(y * t.width() + x) * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0));
      }
  return img;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "write failed for " + path);
}

}  // namespace s2lc
