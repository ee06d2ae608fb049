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
#include <string>
#include <vector>

#include "tensor.hpp"

namespace s2lc {

// Interleaved 8-bit RGB.
struct Image {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> rgb;

  bool operator==(const Image&) const = default;
};

// Binary PPM (P6, maxval 255). Header comments are skipped.
Image parse_ppm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> format_ppm(const Image& image);

// Binary PGM (P5, maxval 255) of a width x height gray plane.
std::vector<std::uint8_t> format_pgm(std::uint32_t width, std::uint32_t height,
                                     std::span<const std::uint8_t> gray);

// (1, 3, H, W) in [0, 1].
Tensor image_to_tensor(const Image& image);
// Rounds to the nearest 8-bit level; NaN becomes 0 and values are clamped.
Image tensor_to_image(const Tensor& t);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace s2lc
