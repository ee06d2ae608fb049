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

#include <cstddef>
#include <span>
#include <vector>

#include "tensor.hpp"
#include "transforms.hpp"
#include "weights.hpp"

namespace s2lc {

struct SliceLayout {
  int slices = 1;
  int width = 1;  // channels per slice

  // Throws kConfig unless `slices` divides `channels`.
  static SliceLayout even(int channels, int slices);
};

std::vector<Tensor> split_slices(const Tensor& y, const SliceLayout& layout);

enum class CheckerPart { kAnchor, kNonAnchor };

// Anchors sit where row + col is even.
struct CheckerboardMask {
  std::size_t height = 0;
  std::size_t width = 0;

  static bool is_anchor(std::size_t row, std::size_t col) { return (row + col) % 2 == 0; }
  std::size_t anchor_count() const { return (height * width + 1) / 2; }
};

// Keeps `part` and zeroes the complementary positions.
Tensor checkerboard_split(const Tensor& t, const CheckerboardMask& mask, CheckerPart part);

// 5x5 checkerboard convolution. Non-anchor inputs are zeroed and kernel taps
// at even (dy + dx) offsets are ignored, so every output only sees anchors.
Tensor spatial_context(const Tensor& y_hat_slice, const ConvParams& params);

struct AdaptiveMapParams {
  ConvParams spatial_fc1, spatial_fc2;  // C -> hidden -> 1
  ConvParams channel_fc1, channel_fc2;  // C -> hidden -> C on pooled input
};

struct AdaptiveMaps {
  Tensor spatial;  // (B, 1, H, W)
  Tensor channel;  // (B, C, 1, 1)
};

// Both maps are sigmoid gates kept strictly inside (0, 1).
AdaptiveMaps adaptive_maps(const Tensor& x, const AdaptiveMapParams& params);

struct DeformableAttnParams {
  int heads = 1;
  int points = 1;
  float offset_scale = 4.0f;  // offsets are tanh(.) * scale, in grid cells
  ConvParams offset;          // 3x3, heads * points * 2 outputs as (dx, dy)
  ConvParams query, key, value, out;  // 1x1
};

// Per query position: sample keys/values around the position at predicted
// offsets, softmax over the sampled points with 1/sqrt(head width) scaling,
// then project.
Tensor deformable_attention(const Tensor& query_feat, const Tensor& context_feat,
                            const DeformableAttnParams& params);

struct AgParams {
  AdaptiveMapParams maps;
  ConvParams depthwise;  // 3x3
  DeformableAttnParams attention;
};

// (C_map * G) + (S_map * D_w) with G the deformable branch.
Tensor ag_context(const Tensor& x, const AgParams& params);

struct AcParams {
  AdaptiveMapParams maps;
  ConvParams depthwise;
  ConvParams fc1, fc2;  // pointwise channel mixing
  ConvParams gate;      // pooled channel gate
};

// Channel-attention branch C_w: fc2(GELU(fc1(x))) * sigmoid(gate(pool(x))).
Tensor channel_branch(const Tensor& x, const AcParams& params);

// (C_map * D_w) + (S_map * C_w)
Tensor ac_context(const Tensor& x, const AcParams& params);

struct EntropyParams {
  Tensor mean;
  Tensor scale;  // >= kSigmaMin
};

struct ContextFeatures {
  Tensor hyper;    // Phi_hs projected to this slice
  Tensor channel;  // AC output
  Tensor global;   // AG output
  Tensor spatial;  // Phi_sp, all zero in the anchor pass
};

struct EntropyParamNet {
  ConvParams conv0, conv1, conv2;  // 1x1 with LeakyReLU between
};

EntropyParams entropy_parameters(const ContextFeatures& ctx, const EntropyParamNet& net);

struct LrpParams {
  ConvParams conv0, conv1, conv2;  // 3x3 with LeakyReLU between
};

// 0.5 * tanh(net(hyper, decoded context, slice)), strictly inside (-0.5, 0.5).
Tensor latent_residual_prediction(const Tensor& hyper, const Tensor& decoded_context,
                                  const Tensor& y_hat_slice, const LrpParams& params);

struct SliceParams {
  ConvParams hyper_proj;
  ConvParams context_proj;  // empty for slice 0
  AgParams ag;
  AcParams ac;
  ConvParams spatial;
  EntropyParamNet entropy;
  LrpParams lrp;
};

SliceParams bind_slice(const ModelWeights& w, int slice);

// Slice-level state shared by the anchor and non-anchor passes.
struct SliceContext {
  Tensor hyper;    // projected Phi_hs
  Tensor decoded;  // projected earlier slices (zeros for slice 0)
  Tensor channel;  // AC
  Tensor global;   // AG
};

// `phi_hs` is the full hyper-synthesis output; `earlier` holds the decoded
// (LRP-corrected) slices before this one.
SliceContext prepare_slice_context(const Tensor& phi_hs, std::span<const Tensor> earlier,
                                   const SliceParams& params, int context_width);

EntropyParams anchor_parameters(const SliceContext& ctx, const SliceParams& params);
EntropyParams non_anchor_parameters(const SliceContext& ctx, const Tensor& anchors_hat,
                                    const SliceParams& params);
Tensor slice_correction(const SliceContext& ctx, const Tensor& y_hat_slice,
                        const SliceParams& params);

}  // namespace s2lc
