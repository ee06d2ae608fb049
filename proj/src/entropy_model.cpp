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

#include "entropy_model.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

#include "coder.hpp"
#include "error.hpp"

namespace s2lc {
namespace {

constexpr Activation kLeaky{ActivationKind::kLeakyRelu, 0.01f};
constexpr Activation kGelu{ActivationKind::kGelu};

Tensor pointwise(const Tensor& x, const ConvParams& p) {
  return conv2d(x, p.weight, p.bias, ConvSpec::same(1));
}

// sigmoid kept strictly inside (0, 1) after rounding to float
Tensor open_gate(const Tensor& logits) {
  Tensor out = logits;
  const float hi = std::nextafter(1.0f, 0.0f);
  for (float& v : out.data()) {
    v = std::clamp(static_cast<float>(sigmoid(v)), FLT_MIN, hi);
  }
  return out;
}

double softplus(double x) { return x > 20.0 ? x : std::log1p(std::exp(x)); }

ConvParams bind_conv(const ModelWeights& w, const std::string& name) {
  return {w.get(name + ".weight"), w.get(name + ".bias")};
}

AdaptiveMapParams bind_maps(const ModelWeights& w, const std::string& prefix) {
  return {bind_conv(w, prefix + ".smap.fc1"), bind_conv(w, prefix + ".smap.fc2"),
          bind_conv(w, prefix + ".cmap.fc1"), bind_conv(w, prefix + ".cmap.fc2")};
}

}  // namespace

SliceLayout SliceLayout::even(int channels, int slices) {
  if (slices <= 0 || channels <= 0 || channels % slices != 0) {
    fail(ErrorCode::kConfig, "slice count " + std::to_string(slices) +
                                 " does not evenly divide " + std::to_string(channels) +
                                 " channels");
  }
  return {slices, channels / slices};
}

std::vector<Tensor> split_slices(const Tensor& y, const SliceLayout& layout) {
  if (y.channels() != static_cast<std::size_t>(layout.slices * layout.width)) {
    fail(ErrorCode::kShape, "split_slices: latent has " + std::to_string(y.channels()) +
                                " channels, layout covers " +
                                std::to_string(layout.slices * layout.width));
  }
  std::vector<Tensor> out;
  for (int i = 0; i < layout.slices; ++i) {
    out.push_back(slice_channels(y, static_cast<std::size_t>(i * layout.width), layout.width));
  }
  return out;
}

Tensor checkerboard_split(const Tensor& t, const CheckerboardMask& mask, CheckerPart part) {
  if (t.height() != mask.height || t.width() != mask.width) {
    fail(ErrorCode::kShape, "checkerboard_split: mask " + std::to_string(mask.height) + "x" +
                                std::to_string(mask.width) + " vs tensor " + to_string(t.dims()));
  }
  Tensor out = t;
  const bool keep_anchor = part == CheckerPart::kAnchor;
  for (std::size_t n = 0; n < t.batch(); ++n)
    for (std::size_t c = 0; c < t.channels(); ++c)
      for (std::size_t y = 0; y < t.height(); ++y)
        for (std::size_t x = 0; x < t.width(); ++x) {
          if (CheckerboardMask::is_anchor(y, x) != keep_anchor) out.at(n, c, y, x) = 0.0f;
        }
  return out;
}

Tensor spatial_context(const Tensor& y_hat_slice, const ConvParams& params) {
  const Tensor anchors = checkerboard_split(
      y_hat_slice, {y_hat_slice.height(), y_hat_slice.width()}, CheckerPart::kAnchor);
  Tensor kernel = params.weight;
  if (kernel.height() != 5 || kernel.width() != 5) {
    fail(ErrorCode::kShape, "spatial_context: kernel must be 5x5");
  }
  for (std::size_t o = 0; o < kernel.batch(); ++o)
    for (std::size_t i = 0; i < kernel.channels(); ++i)
      for (std::size_t ky = 0; ky < 5; ++ky)
        for (std::size_t kx = 0; kx < 5; ++kx) {
          if ((ky + kx) % 2 == 0) kernel.at(o, i, ky, kx) = 0.0f;  // offsets (ky-2)+(kx-2) even
        }
  return conv2d(anchors, kernel, params.bias, ConvSpec::same(5));
}

AdaptiveMaps adaptive_maps(const Tensor& x, const AdaptiveMapParams& p) {
  AdaptiveMaps maps;
  maps.spatial = open_gate(pointwise(activation(pointwise(x, p.spatial_fc1), kGelu), p.spatial_fc2));
  maps.channel = open_gate(
      pointwise(activation(pointwise(global_avg_pool(x), p.channel_fc1), kGelu), p.channel_fc2));
  if (maps.spatial.channels() != 1 || maps.channel.channels() != x.channels()) {
    fail(ErrorCode::kShape, "adaptive_maps: map widths do not match the input");
  }
  return maps;
}

Tensor deformable_attention(const Tensor& query_feat, const Tensor& context_feat,
                            const DeformableAttnParams& p) {
  if (query_feat.height() != context_feat.height() || query_feat.width() != context_feat.width() ||
      query_feat.batch() != context_feat.batch()) {
    fail(ErrorCode::kShape, "deformable_attention: query and context spatial dims differ");
  }
  const Tensor offsets = activation(
      conv2d(query_feat, p.offset.weight, p.offset.bias, ConvSpec::same(3)),
      {ActivationKind::kTanh});
  const std::size_t heads = p.heads;
  const std::size_t points = p.points;
  if (offsets.channels() != heads * points * 2) {
    fail(ErrorCode::kShape, "deformable_attention: offset net must emit heads*points*2 channels");
  }
  const Tensor q = pointwise(query_feat, p.query);
  const Tensor k = pointwise(context_feat, p.key);
  const Tensor v = pointwise(context_feat, p.value);
  const std::size_t c = q.channels();
  if (heads == 0 || c % heads != 0 || k.channels() != c || v.channels() != c) {
    fail(ErrorCode::kShape, "deformable_attention: projection widths must match and divide heads");
  }
  const std::size_t d = c / heads;
  const double inv_scale = 1.0 / std::sqrt(static_cast<double>(d));

  Tensor gathered(q.dims());
  std::vector<double> logits(points);
  std::vector<double> sampled_v(points * d);
  std::vector<double> sampled_k(d);
  for (std::size_t n = 0; n < q.batch(); ++n)
    for (std::size_t y = 0; y < q.height(); ++y)
      for (std::size_t x = 0; x < q.width(); ++x)
        for (std::size_t h = 0; h < heads; ++h) {
          for (std::size_t pt = 0; pt < points; ++pt) {
            const std::size_t ch = (h * points + pt) * 2;
            const double px = static_cast<double>(x) + p.offset_scale * offsets.at(n, ch, y, x);
            const double py = static_cast<double>(y) + p.offset_scale * offsets.at(n, ch + 1, y, x);
            double dot = 0;
            for (std::size_t e = 0; e < d; ++e) {
              sampled_k[e] = sample_pixel(k, n, h * d + e, px, py);
              sampled_v[pt * d + e] = sample_pixel(v, n, h * d + e, px, py);
              dot += q.at(n, h * d + e, y, x) * sampled_k[e];
            }
            logits[pt] = dot * inv_scale;
          }
          softmax_inplace(logits);
          for (std::size_t e = 0; e < d; ++e) {
            double acc = 0;
            for (std::size_t pt = 0; pt < points; ++pt) acc += logits[pt] * sampled_v[pt * d + e];
            gathered.at(n, h * d + e, y, x) = static_cast<float>(acc);
          }
        }
  return pointwise(gathered, p.out);
}

Tensor ag_context(const Tensor& x, const AgParams& p) {
  const AdaptiveMaps maps = adaptive_maps(x, p.maps);
  const Tensor global = deformable_attention(x, x, p.attention);
  const Tensor local = conv2d(x, p.depthwise.weight, p.depthwise.bias,
                              ConvSpec::depthwise(3, static_cast<int>(x.channels())));
  return add(multiply(maps.channel, global), multiply(maps.spatial, local));
}

Tensor channel_branch(const Tensor& x, const AcParams& p) {
  const Tensor mixed = pointwise(activation(pointwise(x, p.fc1), kGelu), p.fc2);
  const Tensor gate = open_gate(pointwise(global_avg_pool(x), p.gate));
  return multiply(mixed, gate);
}

Tensor ac_context(const Tensor& x, const AcParams& p) {
  const AdaptiveMaps maps = adaptive_maps(x, p.maps);
  const Tensor local = conv2d(x, p.depthwise.weight, p.depthwise.bias,
                              ConvSpec::depthwise(3, static_cast<int>(x.channels())));
  return add(multiply(maps.channel, local), multiply(maps.spatial, channel_branch(x, p)));
}

EntropyParams entropy_parameters(const ContextFeatures& ctx, const EntropyParamNet& net) {
  const Tensor parts[] = {ctx.hyper, ctx.channel, ctx.global, ctx.spatial};
  Tensor x = activation(pointwise(concat_channels(parts), net.conv0), kLeaky);
  x = activation(pointwise(x, net.conv1), kLeaky);
  x = pointwise(x, net.conv2);
  if (x.channels() % 2 != 0) fail(ErrorCode::kShape, "entropy_parameters: odd output width");
  const std::size_t s = x.channels() / 2;
  EntropyParams out{slice_channels(x, 0, s), slice_channels(x, s, s)};
  for (float& v : out.scale.data()) {
    v = std::max(static_cast<float>(softplus(v)), kSigmaMin);
  }
  return out;
}

Tensor latent_residual_prediction(const Tensor& hyper, const Tensor& decoded_context,
                                  const Tensor& y_hat_slice, const LrpParams& p) {
  const Tensor parts[] = {hyper, decoded_context, y_hat_slice};
  Tensor x = activation(conv2d(concat_channels(parts), p.conv0.weight, p.conv0.bias,
                               ConvSpec::same(3)),
                        kLeaky);
  x = activation(conv2d(x, p.conv1.weight, p.conv1.bias, ConvSpec::same(3)), kLeaky);
  x = conv2d(x, p.conv2.weight, p.conv2.bias, ConvSpec::same(3));
  if (x.dims() != y_hat_slice.dims()) {
    fail(ErrorCode::kShape, "latent_residual_prediction: output does not match slice dims");
  }
  const float bound = std::nextafter(0.5f, 0.0f);
  for (float& v : x.data()) {
    v = std::clamp(static_cast<float>(0.5 * std::tanh(static_cast<double>(v))), -bound, bound);
  }
  return x;
}

SliceParams bind_slice(const ModelWeights& w, int slice) {
  const std::string sl = "em.slice" + std::to_string(slice);
  const Profile& profile = w.profile();
  SliceParams p;
  p.hyper_proj = bind_conv(w, sl + ".hs_proj");
  if (slice > 0) p.context_proj = bind_conv(w, sl + ".ctx_proj");
  p.ag.maps = bind_maps(w, sl + ".ag");
  p.ag.depthwise = bind_conv(w, sl + ".ag.dw");
  p.ag.attention.heads = profile.deform_heads;
  p.ag.attention.points = profile.deform_points;
  p.ag.attention.offset_scale = profile.deform_offset_scale;
  p.ag.attention.offset = bind_conv(w, sl + ".ag.da.offset");
  p.ag.attention.query = bind_conv(w, sl + ".ag.da.query");
  p.ag.attention.key = bind_conv(w, sl + ".ag.da.key");
  p.ag.attention.value = bind_conv(w, sl + ".ag.da.value");
  p.ag.attention.out = bind_conv(w, sl + ".ag.da.out");
  p.ac.maps = bind_maps(w, sl + ".ac");
  p.ac.depthwise = bind_conv(w, sl + ".ac.dw");
  p.ac.fc1 = bind_conv(w, sl + ".ac.cw.fc1");
  p.ac.fc2 = bind_conv(w, sl + ".ac.cw.fc2");
  p.ac.gate = bind_conv(w, sl + ".ac.cw.gate");
  p.spatial = bind_conv(w, sl + ".sp");
  p.entropy = {bind_conv(w, sl + ".ep.conv0"), bind_conv(w, sl + ".ep.conv1"),
               bind_conv(w, sl + ".ep.conv2")};
  p.lrp = {bind_conv(w, sl + ".lrp.conv0"), bind_conv(w, sl + ".lrp.conv1"),
           bind_conv(w, sl + ".lrp.conv2")};
  return p;
}

SliceContext prepare_slice_context(const Tensor& phi_hs, std::span<const Tensor> earlier,
                                   const SliceParams& params, int context_width) {
  SliceContext ctx;
  ctx.hyper = pointwise(phi_hs, params.hyper_proj);
  if (earlier.empty()) {
    ctx.decoded = Tensor({phi_hs.batch(), static_cast<std::size_t>(context_width),
                          phi_hs.height(), phi_hs.width()});
  } else {
    ctx.decoded = pointwise(concat_channels(earlier), params.context_proj);
  }
  ctx.channel = ac_context(ctx.decoded, params.ac);
  ctx.global = ag_context(ctx.decoded, params.ag);
  return ctx;
}

EntropyParams anchor_parameters(const SliceContext& ctx, const SliceParams& params) {
  const Tensor zeros({ctx.hyper.batch(), params.spatial.weight.batch(), ctx.hyper.height(),
                      ctx.hyper.width()});
  return entropy_parameters({ctx.hyper, ctx.channel, ctx.global, zeros}, params.entropy);
}

EntropyParams non_anchor_parameters(const SliceContext& ctx, const Tensor& anchors_hat,
                                    const SliceParams& params) {
  return entropy_parameters(
      {ctx.hyper, ctx.channel, ctx.global, spatial_context(anchors_hat, params.spatial)},
      params.entropy);
}

Tensor slice_correction(const SliceContext& ctx, const Tensor& y_hat_slice,
                        const SliceParams& params) {
  return latent_residual_prediction(ctx.hyper, ctx.decoded, y_hat_slice, params.lrp);
}

}  // namespace s2lc
