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
#include <string>
#include <vector>

#include "tensor.hpp"
#include "weights.hpp"

namespace s2lc {

struct ConvParams {
  Tensor weight;
  Tensor bias;
};

// Token projection stored as a (out, in, 1, 1) kernel.
struct LinearParams {
  Tensor weight;
  Tensor bias;
};

// Applies a linear map to tokens laid out as (1, 1, tokens, features).
Tensor linear_tokens(const Tensor& tokens, const LinearParams& params);

struct DenseBlockParams {
  std::array<ConvParams, 5> layers;  // 3x3, layer i reads C + i*g channels
  ConvParams projection;             // 1x1 back to C
};

// Five conv+LeakyReLU layers over the running concatenation, then the
// projection. The caller owns the residual connection.
Tensor dense_block(const Tensor& input, const DenseBlockParams& params);

struct LogCpbParams {
  int heads = 1;
  int hidden = 1;
  std::vector<float> fc1_weight;  // heads x hidden x 2
  std::vector<float> fc1_bias;    // heads x hidden
  std::vector<float> fc2_weight;  // heads x hidden
  std::vector<float> fc2_bias;    // heads
};

// sign(d) * log2(1 + |d|) / log2(8)
double log_cpb_coordinate(int delta);

// (1, heads, w*w, w*w) relative position bias for one window.
Tensor log_cpb_bias(const LogCpbParams& params, int window);

// Cosine of two rows; 0 when either norm is below 1e-12.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

// Per-head softmax(cosine(q, k) / tau + bias) over tokens laid out as
// (1, 1, T, C). `bias` may be empty or (1, heads, T, T); `mask` may be empty or
// T*T flags where 0 excludes the key. Returns (1, heads, T, T).
Tensor attention_weights(const Tensor& q, const Tensor& k, std::span<const float> tau,
                         const Tensor& bias, std::span<const std::uint8_t> mask = {});

// attention_weights applied to v; heads concatenated to (1, 1, T, C).
Tensor scaled_cosine_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                               std::span<const float> tau, const Tensor& bias,
                               std::span<const std::uint8_t> mask = {});

struct ScaledCosineAttnParams {
  std::vector<float> tau;  // one per head, each > 0.01
  LogCpbParams cpb;
  LinearParams qkv;
  LinearParams proj;
};

struct S2TLConfig {
  int window = 8;
  int shift = 0;  // 0 or window / 2
};

struct S2TLParams {
  ScaledCosineAttnParams attention;
  std::vector<float> norm1_gamma, norm1_beta;
  LinearParams mlp_fc1, mlp_fc2;
  std::vector<float> norm2_gamma, norm2_beta;
};

// One post-norm Swin layer on a (B, C, H, W) feature map:
//   x <- x + LN(Attn(x));  x <- x + LN(MLP(x)).
// The map is zero padded to whole windows; padded tokens never attend to real
// ones and are cropped on exit.
Tensor s2tl_forward(const Tensor& feature, const S2TLConfig& config, const S2TLParams& params);

struct RS2TBParams {
  int window = 8;
  LinearParams embed;
  std::vector<S2TLParams> layers;  // shift alternates 0, w/2
  LinearParams unembed;
};

Tensor rs2tb_forward(const Tensor& feature, const RS2TBParams& params);

DenseBlockParams bind_dense_block(const ModelWeights& w, const std::string& prefix);
S2TLParams bind_s2tl(const ModelWeights& w, const std::string& prefix);
RS2TBParams bind_rs2tb(const ModelWeights& w, const std::string& prefix);

// Image sides must be multiples of 64. Output: (B, M, H/16, W/16).
Tensor analysis_transform(const Tensor& image, const ModelWeights& w);
// Output: (B, 3, 16h, 16w) clamped to [0, 1].
Tensor synthesis_transform(const Tensor& y_hat, const ModelWeights& w);
// (B, M, h, w) -> (B, N, h/4, w/4)
Tensor hyper_analysis(const Tensor& y, const ModelWeights& w);
// (B, N, h, w) -> (B, 2M, 4h, 4w)
Tensor hyper_synthesis(const Tensor& z_hat, const ModelWeights& w);

}  // namespace s2lc
