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
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace s2lc {

// Dense float tensor in (batch, channels, height, width) order.
class Tensor {
 public:
  using Dims = std::array<std::size_t, 4>;

  Tensor() = default;
  explicit Tensor(Dims dims, float fill = 0.0f);
  Tensor(Dims dims, std::vector<float> data);

  const Dims& dims() const noexcept { return dims_; }
  std::size_t batch() const noexcept { return dims_[0]; }
  std::size_t channels() const noexcept { return dims_[1]; }
  std::size_t height() const noexcept { return dims_[2]; }
  std::size_t width() const noexcept { return dims_[3]; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<const float> data() const noexcept { return data_; }
  std::span<float> data() noexcept { return data_; }

  std::size_t index(std::size_t n, std::size_t c, std::size_t y,
                    std::size_t x) const noexcept {
    return ((n * dims_[1] + c) * dims_[2] + y) * dims_[3] + x;
  }
  float& at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) {
    return data_[index(n, c, y, x)];
  }
  float at(std::size_t n, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[index(n, c, y, x)];
  }

  // Same data, new dims with equal element count.
  Tensor reshaped(Dims dims) const;

 private:
  Dims dims_{0, 0, 0, 0};
  std::vector<float> data_;
};

std::string to_string(const Tensor::Dims& dims);

// Bit-for-bit equality of dims and payload.
bool bitwise_equal(const Tensor& a, const Tensor& b);

struct ConvSpec {
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;
  int padding = 0;
  int groups = 1;
  bool transposed = false;
  int output_padding = 0;  // transposed only

  static ConvSpec same(int k) { return {k, k, 1, k / 2, 1, false, 0}; }
  static ConvSpec down(int k) { return {k, k, 2, k / 2, 1, false, 0}; }
  static ConvSpec up(int k) { return {k, k, 2, k / 2, 1, true, 1}; }
  static ConvSpec depthwise(int k, int channels) {
    return {k, k, 1, k / 2, channels, false, 0};
  }
};

// Regular weights are (out, in/groups, kh, kw); transposed weights use
// (in, out/groups, kh, kw). An empty bias means zero bias.
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const ConvSpec& spec);

enum class ActivationKind { kGelu, kLeakyRelu, kSigmoid, kTanh, kRelu };

struct Activation {
  ActivationKind kind = ActivationKind::kGelu;
  float slope = 0.01f;  // leaky relu only
};

double gelu(double x);
double sigmoid(double x);
double leaky_relu(double x, double slope);

Tensor activation(const Tensor& input, Activation act);

// Normalizes along the last (width) axis, i.e. per token when tokens are laid
// out as (1, 1, tokens, features).
Tensor layer_norm(const Tensor& input, std::span<const float> gamma,
                  std::span<const float> beta, double eps = 1e-5);

Tensor softmax(const Tensor& input, int axis);

// Max-subtracted softmax over a double row; the kernel behind softmax() and
// the attention layers.
void softmax_inplace(std::span<double> values);

Tensor global_avg_pool(const Tensor& input);

// feature (B, C, H, W), points (B, 1, P, 2) holding normalized (x, y) in
// [-1, 1] with align-corners mapping. Result is (B, C, 1, P).
Tensor bilinear_sample(const Tensor& feature, const Tensor& points);

// Bilinear read at fractional pixel coordinates, clamped to the border.
double sample_pixel(const Tensor& feature, std::size_t n, std::size_t c,
                    double px, double py);

// Elementwise ops with broadcasting over axes of extent 1.
Tensor add(const Tensor& a, const Tensor& b);
Tensor multiply(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, float factor);

Tensor concat_channels(std::span<const Tensor> parts);
Tensor slice_channels(const Tensor& input, std::size_t begin, std::size_t count);

Tensor pad_replicate(const Tensor& input, std::size_t height, std::size_t width);
Tensor pad_zero(const Tensor& input, std::size_t height, std::size_t width);
Tensor crop(const Tensor& input, std::size_t height, std::size_t width);

// Cyclic shift of the spatial axes: out[y][x] = in[y - dy][x - dx].
Tensor roll(const Tensor& input, long dy, long dx);

}  // namespace s2lc
