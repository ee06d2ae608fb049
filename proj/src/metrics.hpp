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

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "image.hpp"
#include "tensor.hpp"

namespace s2lc {

inline constexpr double kPsnrCap = 100.0;
inline constexpr std::array<double, 6> kLambdaPresets = {0.0018, 0.0035, 0.0075,
                                                         0.013,  0.025,  0.048};

bool is_lambda_preset(double lambda);

// Mean squared error on the [0, 255] scale.
double mse(const Image& a, const Image& b);
// 10 log10(255^2 / MSE), capped at 100 dB for identical images.
double psnr(const Image& a, const Image& b);

double bits_per_pixel(double bits, std::uint64_t pixels);

struct RdLoss {
  double bpp;
  double distortion;  // lambda * mse
  double loss;        // bpp + distortion
};

RdLoss rd_loss(double rate_bits, std::uint64_t pixels, double mse, double lambda);

struct RdPoint {
  double rate;     // bpp, > 0
  double quality;  // PSNR dB
};

// Least-squares cubic log10(rate) = c0 + c1 q + c2 q^2 + c3 q^3.
std::array<double, 4> fit_log_rate(std::span<const RdPoint> curve);

// Mean log10 rate gap (b - a) over the shared quality interval.
double bd_log_rate_delta(std::span<const RdPoint> a, std::span<const RdPoint> b);

// Percent rate change of b relative to a; negative means b is cheaper.
double bd_rate(std::span<const RdPoint> a, std::span<const RdPoint> b);

struct GrayMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;
};

// Channel mean of |y_hat| per position, min-max stretched to 0..255. A flat
// map becomes 128 everywhere.
GrayMap latent_map(const Tensor& y_hat);

}  // namespace s2lc
