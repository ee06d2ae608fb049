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

#include "metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "error.hpp"

namespace s2lc {
namespace {

void check_curve(std::span<const RdPoint> curve) {
  if (curve.size() < 4) {
    fail(ErrorCode::kDomain, "BD-Rate needs at least 4 points per curve, got " +
                                 std::to_string(curve.size()));
  }
  for (const RdPoint& p : curve) {
    if (!(p.rate > 0) || !std::isfinite(p.rate) || !std::isfinite(p.quality)) {
      fail(ErrorCode::kDomain, "BD-Rate points need finite positive rates and finite PSNR");
    }
  }
}

// Integral of the cubic over [lo, hi].
double integrate(const std::array<double, 4>& c, double lo, double hi) {
  auto antiderivative = [&c](double q) {
    return q * (c[0] + q * (c[1] / 2 + q * (c[2] / 3 + q * c[3] / 4)));
  };
  return antiderivative(hi) - antiderivative(lo);
}

}  // namespace

bool is_lambda_preset(double lambda) {
  return std::find(kLambdaPresets.begin(), kLambdaPresets.end(), lambda) != kLambdaPresets.end();
}

double mse(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height || a.rgb.size() != b.rgb.size()) {
    fail(ErrorCode::kShape, "image dims differ: " + std::to_string(a.width) + "x" +
                                std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                                std::to_string(b.height));
  }
  if (a.rgb.empty()) fail(ErrorCode::kShape, "empty image");
  double acc = 0;
  for (std::size_t i = 0; i < a.rgb.size(); ++i) {
    const double d = static_cast<double>(a.rgb[i]) - b.rgb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.rgb.size());
}

double psnr(const Image& a, const Image& b) {
  const double e = mse(a, b);
  if (e == 0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / e));
}

double bits_per_pixel(double bits, std::uint64_t pixels) {
  if (pixels == 0) fail(ErrorCode::kDomain, "bits per pixel of an empty image");
  return bits / static_cast<double>(pixels);
}

RdLoss rd_loss(double rate_bits, std::uint64_t pixels, double mse_value, double lambda) {
  if (!(lambda > 0)) fail(ErrorCode::kDomain, "lambda must be positive");
  const double bpp = bits_per_pixel(rate_bits, pixels);
  const double distortion = lambda * mse_value;
  return {bpp, distortion, bpp + distortion};
}

std::array<double, 4> fit_log_rate(std::span<const RdPoint> curve) {
  check_curve(curve);
  Eigen::MatrixXd v(static_cast<Eigen::Index>(curve.size()), 4);
  Eigen::VectorXd r(static_cast<Eigen::Index>(curve.size()));
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    double q = 1;
    for (int k = 0; k < 4; ++k, q *= curve[i].quality) v(row, k) = q;
    r(row) = std::log10(curve[i].rate);
  }
  const Eigen::Vector4d c = v.colPivHouseholderQr().solve(r);
  return {c(0), c(1), c(2), c(3)};
}

double bd_log_rate_delta(std::span<const RdPoint> a, std::span<const RdPoint> b) {
  const auto ca = fit_log_rate(a);
  const auto cb = fit_log_rate(b);
  auto range = [](std::span<const RdPoint> c) {
    auto [lo, hi] = std::minmax_element(c.begin(), c.end(), [](const RdPoint& x, const RdPoint& y) {
      return x.quality < y.quality;
    });
    return std::pair{lo->quality, hi->quality};
  };
  const auto [a_lo, a_hi] = range(a);
  const auto [b_lo, b_hi] = range(b);
  const double lo = std::max(a_lo, b_lo);
  const double hi = std::min(a_hi, b_hi);
  if (!(hi > lo)) fail(ErrorCode::kDomain, "RD curves have no overlapping PSNR range");
  return (integrate(cb, lo, hi) - integrate(ca, lo, hi)) / (hi - lo);
}

double bd_rate(std::span<const RdPoint> a, std::span<const RdPoint> b) {
  return (std::pow(10.0, bd_log_rate_delta(a, b)) - 1.0) * 100.0;
}

GrayMap latent_map(const Tensor& y_hat) {
  if (y_hat.batch() != 1 || y_hat.empty()) {
    fail(ErrorCode::kShape, "latent_map expects one non-empty latent, got " + to_string(y_hat.dims()));
  }
  const std::size_t h = y_hat.height();
  const std::size_t w = y_hat.width();
  std::vector<double> mean(h * w, 0.0);
  for (std::size_t c = 0; c < y_hat.channels(); ++c)
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) mean[y * w + x] += std::fabs(y_hat.at(0, c, y, x));
  for (double& m : mean) m /= static_cast<double>(y_hat.channels());

  GrayMap out{static_cast<std::uint32_t>(w), static_cast<std::uint32_t>(h), {}};
  const auto [lo, hi] = std::minmax_element(mean.begin(), mean.end());
  const double span = *hi - *lo;
  out.pixels.reserve(mean.size());
  for (double m : mean) {
    out.pixels.push_back(span > 0 ? static_cast<std::uint8_t>(std::lround((m - *lo) / span * 255.0))
                                  : std::uint8_t{128});
  }
  return out;
}

}  // namespace s2lc
