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

#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "error.hpp"

namespace s2lc {
namespace {

std::size_t product(const Tensor::Dims& dims) {
  return dims[0] * dims[1] * dims[2] * dims[3];
}

[[noreturn]] void shape_error(const std::string& op, const std::string& what) {
  fail(ErrorCode::kShape, op + ": " + what);
}

std::string mismatch(const char* axis, std::size_t got, std::size_t want) {
  std::ostringstream os;
  os << axis << " is " << got << ", expected " << want;
  return os.str();
}

// Broadcast extent of one axis, or throws.
std::size_t broadcast_axis(const char* op, int axis, std::size_t a, std::size_t b) {
  if (a == b) return a;
  if (a == 1) return b;
  if (b == 1) return a;
  static const char* kNames[] = {"batch", "channel", "height", "width"};
  shape_error(op, std::string(kNames[axis]) + " axis " + std::to_string(a) +
                      " vs " + std::to_string(b) + " cannot broadcast");
}

template <typename Fn>
Tensor broadcast(const char* op, const Tensor& a, const Tensor& b, Fn fn) {
  Tensor::Dims out_dims;
  for (int i = 0; i < 4; ++i) {
    out_dims[i] = broadcast_axis(op, i, a.dims()[i], b.dims()[i]);
  }
  Tensor out(out_dims);
  auto pick = [](std::size_t extent, std::size_t i) { return extent == 1 ? 0 : i; };
  for (std::size_t n = 0; n < out_dims[0]; ++n)
    for (std::size_t c = 0; c < out_dims[1]; ++c)
      for (std::size_t y = 0; y < out_dims[2]; ++y)
        for (std::size_t x = 0; x < out_dims[3]; ++x) {
          const float va = a.at(pick(a.batch(), n), pick(a.channels(), c),
                                pick(a.height(), y), pick(a.width(), x));
          const float vb = b.at(pick(b.batch(), n), pick(b.channels(), c),
                                pick(b.height(), y), pick(b.width(), x));
          out.at(n, c, y, x) = fn(va, vb);
        }
  return out;
}

}  // namespace

Tensor::Tensor(Dims dims, float fill) : dims_(dims), data_(product(dims), fill) {}

Tensor::Tensor(Dims dims, std::vector<float> data)
    : dims_(dims), data_(std::move(data)) {
  if (data_.size() != product(dims_)) {
    shape_error("tensor", mismatch("data length", data_.size(), product(dims_)));
  }
}

Tensor Tensor::reshaped(Dims dims) const {
  return Tensor(dims, data_);
}

std::string to_string(const Tensor::Dims& dims) {
  std::ostringstream os;
  os << dims[0] << "x" << dims[1] << "x" << dims[2] << "x" << dims[3];
  return os.str();
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (a.dims() != b.dims()) return false;
  return a.size() == 0 ||
         std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              const ConvSpec& spec) {
  const char* op = "conv2d";
  if (spec.kernel_h <= 0 || spec.kernel_w <= 0 || spec.stride <= 0 ||
      spec.padding < 0 || spec.groups <= 0 || spec.output_padding < 0) {
    fail(ErrorCode::kConfig, "conv2d: invalid kernel/stride/padding/groups");
  }
  const std::size_t kh = spec.kernel_h;
  const std::size_t kw = spec.kernel_w;
  const std::size_t stride = spec.stride;
  const long pad = spec.padding;
  const std::size_t groups = spec.groups;
  const std::size_t cin = input.channels();
  if (weight.height() != kh) shape_error(op, mismatch("kernel height", weight.height(), kh));
  if (weight.width() != kw) shape_error(op, mismatch("kernel width", weight.width(), kw));
  if (cin % groups != 0) {
    shape_error(op, "input channels " + std::to_string(cin) +
                        " not divisible by groups " + std::to_string(groups));
  }
  const std::size_t cin_g = cin / groups;

  std::size_t cout = 0;
  std::size_t cout_g = 0;
  if (spec.transposed) {
    if (weight.batch() != cin) shape_error(op, mismatch("weight in-channels", weight.batch(), cin));
    cout_g = weight.channels();
    cout = cout_g * groups;
  } else {
    if (weight.channels() != cin_g) {
      shape_error(op, mismatch("weight in-channels", weight.channels(), cin_g));
    }
    cout = weight.batch();
    if (cout % groups != 0) {
      shape_error(op, "output channels " + std::to_string(cout) +
                          " not divisible by groups " + std::to_string(groups));
    }
    cout_g = cout / groups;
  }
  if (!bias.empty() && bias.size() != cout) {
    shape_error(op, mismatch("bias length", bias.size(), cout));
  }

  const long in_h = static_cast<long>(input.height());
  const long in_w = static_cast<long>(input.width());
  long out_h = 0;
  long out_w = 0;
  if (spec.transposed) {
    out_h = (in_h - 1) * static_cast<long>(stride) - 2 * pad + static_cast<long>(kh) +
            spec.output_padding;
    out_w = (in_w - 1) * static_cast<long>(stride) - 2 * pad + static_cast<long>(kw) +
            spec.output_padding;
  } else {
    out_h = (in_h + 2 * pad - static_cast<long>(kh)) / static_cast<long>(stride) + 1;
    out_w = (in_w + 2 * pad - static_cast<long>(kw)) / static_cast<long>(stride) + 1;
    if (in_h + 2 * pad < static_cast<long>(kh)) out_h = 0;
    if (in_w + 2 * pad < static_cast<long>(kw)) out_w = 0;
  }
  if (out_h <= 0 || out_w <= 0) {
    shape_error(op, "input " + to_string(input.dims()) + " too small for kernel");
  }

  Tensor out({input.batch(), cout, static_cast<std::size_t>(out_h),
              static_cast<std::size_t>(out_w)});
  const auto in = input.data();
  const auto wt = weight.data();
  auto dst = out.data();

  for (std::size_t n = 0; n < input.batch(); ++n) {
    for (std::size_t co = 0; co < cout; ++co) {
      const std::size_t g = co / cout_g;
      const std::size_t co_local = co % cout_g;
      const double b = bias.empty() ? 0.0 : bias.data()[co];
      for (long oy = 0; oy < out_h; ++oy) {
        for (long ox = 0; ox < out_w; ++ox) {
          double acc = b;
          for (std::size_t ci_local = 0; ci_local < cin_g; ++ci_local) {
            const std::size_t ci = g * cin_g + ci_local;
            const float* plane = in.data() + input.index(n, ci, 0, 0);
            const float* kernel =
                spec.transposed ? wt.data() + weight.index(ci, co_local, 0, 0)
                                : wt.data() + weight.index(co, ci_local, 0, 0);
            for (std::size_t ky = 0; ky < kh; ++ky) {
              long iy = 0;
              if (spec.transposed) {
                const long t = oy + pad - static_cast<long>(ky);
                if (t < 0 || t % static_cast<long>(stride) != 0) continue;
                iy = t / static_cast<long>(stride);
              } else {
                iy = oy * static_cast<long>(stride) - pad + static_cast<long>(ky);
              }
              if (iy < 0 || iy >= in_h) continue;
              for (std::size_t kx = 0; kx < kw; ++kx) {
                long ix = 0;
                if (spec.transposed) {
                  const long t = ox + pad - static_cast<long>(kx);
                  if (t < 0 || t % static_cast<long>(stride) != 0) continue;
                  ix = t / static_cast<long>(stride);
                } else {
                  ix = ox * static_cast<long>(stride) - pad + static_cast<long>(kx);
                }
                if (ix < 0 || ix >= in_w) continue;
                acc += static_cast<double>(plane[iy * in_w + ix]) *
                       static_cast<double>(kernel[ky * kw + kx]);
              }
            }
          }
          dst[out.index(n, co, oy, ox)] = static_cast<float>(acc);
        }
      }
    }
  }
  return out;
}

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0))); }

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double leaky_relu(double x, double slope) { return x >= 0 ? x : x * slope; }

Tensor activation(const Tensor& input, Activation act) {
  Tensor out = input;
  for (float& v : out.data()) {
    const double x = v;
    double r = 0;
    switch (act.kind) {
      case ActivationKind::kGelu: r = gelu(x); break;
      case ActivationKind::kLeakyRelu: r = leaky_relu(x, act.slope); break;
      case ActivationKind::kSigmoid: r = sigmoid(x); break;
      case ActivationKind::kTanh: r = std::tanh(x); break;
      case ActivationKind::kRelu: r = x > 0 ? x : 0.0; break;
    }
    v = static_cast<float>(r);
  }
  return out;
}

Tensor layer_norm(const Tensor& input, std::span<const float> gamma,
                  std::span<const float> beta, double eps) {
  const std::size_t width = input.width();
  if (gamma.size() != width) shape_error("layer_norm", mismatch("gamma length", gamma.size(), width));
  if (beta.size() != width) shape_error("layer_norm", mismatch("beta length", beta.size(), width));
  Tensor out = input;
  if (width == 0) return out;
  auto data = out.data();
  for (std::size_t row = 0; row < data.size() / width; ++row) {
    float* v = data.data() + row * width;
    double mean = 0;
    for (std::size_t i = 0; i < width; ++i) mean += v[i];
    mean /= static_cast<double>(width);
    double var = 0;
    for (std::size_t i = 0; i < width; ++i) var += (v[i] - mean) * (v[i] - mean);
    var /= static_cast<double>(width);
    const double inv = 1.0 / std::sqrt(var + eps);
    for (std::size_t i = 0; i < width; ++i) {
      v[i] = static_cast<float>((v[i] - mean) * inv * gamma[i] + beta[i]);
    }
  }
  return out;
}

Tensor softmax(const Tensor& input, int axis) {
  if (axis < 0 || axis > 3) fail(ErrorCode::kConfig, "softmax: axis must be in [0, 3]");
  const auto& d = input.dims();
  std::size_t stride = 1;
  for (int i = 3; i > axis; --i) stride *= d[i];
  const std::size_t extent = d[axis];
  const std::size_t outer = input.size() / std::max<std::size_t>(1, extent * stride);
  Tensor out = input;
  if (extent == 0) return out;
  auto src = input.data();
  auto dst = out.data();
  std::vector<double> row(extent);
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t s = 0; s < stride; ++s) {
      const std::size_t base = o * extent * stride + s;
      for (std::size_t i = 0; i < extent; ++i) row[i] = src[base + i * stride];
      softmax_inplace(row);
      for (std::size_t i = 0; i < extent; ++i) dst[base + i * stride] = static_cast<float>(row[i]);
    }
  }
  return out;
}

void softmax_inplace(std::span<double> values) {
  if (values.empty()) return;
  const double peak = *std::max_element(values.begin(), values.end());
  double total = 0;
  for (double& v : values) {
    v = std::exp(v - peak);
    total += v;
  }
  for (double& v : values) v /= total;
}

Tensor global_avg_pool(const Tensor& input) {
  if (input.height() == 0 || input.width() == 0) {
    shape_error("global_avg_pool", "empty spatial extent " + to_string(input.dims()));
  }
  Tensor out({input.batch(), input.channels(), 1, 1});
  const std::size_t plane = input.height() * input.width();
  for (std::size_t n = 0; n < input.batch(); ++n)
    for (std::size_t c = 0; c < input.channels(); ++c) {
      const float* p = input.data().data() + input.index(n, c, 0, 0);
      double sum = 0;
      for (std::size_t i = 0; i < plane; ++i) sum += p[i];
      out.at(n, c, 0, 0) = static_cast<float>(sum / static_cast<double>(plane));
    }
  return out;
}

double sample_pixel(const Tensor& feature, std::size_t n, std::size_t c, double px,
                    double py) {
  const double max_x = static_cast<double>(feature.width()) - 1.0;
  const double max_y = static_cast<double>(feature.height()) - 1.0;
  px = std::clamp(px, 0.0, max_x);
  py = std::clamp(py, 0.0, max_y);
  const auto x0 = static_cast<std::size_t>(std::floor(px));
  const auto y0 = static_cast<std::size_t>(std::floor(py));
  const std::size_t x1 = std::min<std::size_t>(x0 + 1, feature.width() - 1);
  const std::size_t y1 = std::min<std::size_t>(y0 + 1, feature.height() - 1);
  const double fx = px - static_cast<double>(x0);
  const double fy = py - static_cast<double>(y0);
  const double top = (1.0 - fx) * feature.at(n, c, y0, x0) + fx * feature.at(n, c, y0, x1);
  const double bottom = (1.0 - fx) * feature.at(n, c, y1, x0) + fx * feature.at(n, c, y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

Tensor bilinear_sample(const Tensor& feature, const Tensor& points) {
  if (points.width() != 2 || points.channels() != 1 || points.batch() != feature.batch()) {
    shape_error("bilinear_sample", "points must be (B, 1, P, 2), got " + to_string(points.dims()));
  }
  if (feature.height() == 0 || feature.width() == 0) {
    shape_error("bilinear_sample", "empty feature");
  }
  const std::size_t count = points.height();
  Tensor out({feature.batch(), feature.channels(), 1, count});
  for (std::size_t n = 0; n < feature.batch(); ++n)
    for (std::size_t p = 0; p < count; ++p) {
      const double x = points.at(n, 0, p, 0);
      const double y = points.at(n, 0, p, 1);
      const double px = (x + 1.0) * 0.5 * (static_cast<double>(feature.width()) - 1.0);
      const double py = (y + 1.0) * 0.5 * (static_cast<double>(feature.height()) - 1.0);
      for (std::size_t c = 0; c < feature.channels(); ++c) {
        out.at(n, c, 0, p) = static_cast<float>(sample_pixel(feature, n, c, px, py));
      }
    }
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  if (a.dims() == b.dims()) {
    Tensor out = a;
    auto d = out.data();
    auto s = b.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i];
    return out;
  }
  return broadcast("add", a, b, [](float x, float y) { return x + y; });
}

Tensor multiply(const Tensor& a, const Tensor& b) {
  return broadcast("multiply", a, b, [](float x, float y) { return x * y; });
}

Tensor scale(const Tensor& a, float factor) {
  Tensor out = a;
  for (float& v : out.data()) v *= factor;
  return out;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) shape_error("concat_channels", "no inputs");
  const auto& first = parts.front().dims();
  std::size_t channels = 0;
  for (const Tensor& t : parts) {
    if (t.batch() != first[0] || t.height() != first[2] || t.width() != first[3]) {
      shape_error("concat_channels", "part " + to_string(t.dims()) +
                                         " does not match " + to_string(first));
    }
    channels += t.channels();
  }
  Tensor out({first[0], channels, first[2], first[3]});
  const std::size_t plane = first[2] * first[3];
  for (std::size_t n = 0; n < first[0]; ++n) {
    std::size_t offset = 0;
    for (const Tensor& t : parts) {
      const std::size_t count = t.channels() * plane;
      std::copy_n(t.data().data() + t.index(n, 0, 0, 0), count,
                  out.data().data() + out.index(n, offset, 0, 0));
      offset += t.channels();
    }
  }
  return out;
}

Tensor slice_channels(const Tensor& input, std::size_t begin, std::size_t count) {
  if (begin + count > input.channels()) {
    shape_error("slice_channels", "range [" + std::to_string(begin) + ", " +
                                      std::to_string(begin + count) + ") exceeds channel axis " +
                                      std::to_string(input.channels()));
  }
  Tensor out({input.batch(), count, input.height(), input.width()});
  const std::size_t plane = input.height() * input.width();
  for (std::size_t n = 0; n < input.batch(); ++n) {
    std::copy_n(input.data().data() + input.index(n, begin, 0, 0), count * plane,
                out.data().data() + out.index(n, 0, 0, 0));
  }
  return out;
}

Tensor pad_replicate(const Tensor& input, std::size_t height, std::size_t width) {
  if (height < input.height() || width < input.width() || input.height() == 0 ||
      input.width() == 0) {
    shape_error("pad_replicate", "target smaller than input " + to_string(input.dims()));
  }
  Tensor out({input.batch(), input.channels(), height, width});
  for (std::size_t n = 0; n < input.batch(); ++n)
    for (std::size_t c = 0; c < input.channels(); ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
          out.at(n, c, y, x) = input.at(n, c, std::min(y, input.height() - 1),
                                        std::min(x, input.width() - 1));
        }
  return out;
}

Tensor pad_zero(const Tensor& input, std::size_t height, std::size_t width) {
  if (height < input.height() || width < input.width()) {
    shape_error("pad_zero", "target smaller than input " + to_string(input.dims()));
  }
  Tensor out({input.batch(), input.channels(), height, width});
  for (std::size_t n = 0; n < input.batch(); ++n)
    for (std::size_t c = 0; c < input.channels(); ++c)
      for (std::size_t y = 0; y < input.height(); ++y)
        for (std::size_t x = 0; x < input.width(); ++x) out.at(n, c, y, x) = input.at(n, c, y, x);
  return out;
}

Tensor crop(const Tensor& input, std::size_t height, std::size_t width) {
  if (height > input.height() || width > input.width()) {
    shape_error("crop", "target larger than input " + to_string(input.dims()));
  }
  Tensor out({input.batch(), input.channels(), height, width});
  for (std::size_t n = 0; n < input.batch(); ++n)
    for (std::size_t c = 0; c < input.channels(); ++c)
      for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) out.at(n, c, y, x) = input.at(n, c, y, x);
  return out;
}

Tensor roll(const Tensor& input, long dy, long dx) {
  Tensor out(input.dims());
  const long h = static_cast<long>(input.height());
  const long w = static_cast<long>(input.width());
  if (h == 0 || w == 0) return out;
  for (std::size_t n = 0; n < input.batch(); ++n)
    for (std::size_t c = 0; c < input.channels(); ++c)
      for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
          const long sy = ((y - dy) % h + h) % h;
          const long sx = ((x - dx) % w + w) % w;
          out.at(n, c, y, x) = input.at(n, c, sy, sx);
        }
  return out;
}

}  // namespace s2lc
