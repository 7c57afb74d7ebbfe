#include <algorithm>

#include "caranet/ops.hpp"

namespace caranet {

ConvSpec ConvSpec::same(int kernel_h, int kernel_w, int in_channels, int out_channels,
                        int dilation, int stride) {
  ConvSpec spec;
  spec.kernel_h = kernel_h;
  spec.kernel_w = kernel_w;
  spec.dilation = dilation;
  spec.stride = stride;
  spec.pad_h = (kernel_h - 1) * dilation / 2;
  spec.pad_w = (kernel_w - 1) * dilation / 2;
  spec.in_channels = in_channels;
  spec.out_channels = out_channels;
  return spec;
}

namespace {

void check_conv_args(const Tensor& input, const Tensor& weights, const Tensor* bias,
                     const ConvSpec& spec) {
  if (input.ndim() != 4) {
    throw ShapeError("conv2d: input must be (N, C, H, W), got " + shape_string(input.shape()));
  }
  if (input.dim(1) != spec.in_channels) {
    throw ShapeError("conv2d: input channel axis is " + std::to_string(input.dim(1)) +
                     ", spec expects " + std::to_string(spec.in_channels));
  }
  Shape expect{spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w};
  if (weights.shape() != expect) {
    throw ShapeError("conv2d: weights must be " + shape_string(expect) + ", got " +
                     shape_string(weights.shape()));
  }
  if (bias && bias->shape() != Shape{spec.out_channels}) {
    throw ShapeError("conv2d: bias must be (" + std::to_string(spec.out_channels) + "), got " +
                     shape_string(bias->shape()));
  }
  if (spec.dilation < 1 || spec.stride < 1 || spec.pad_h < 0 || spec.pad_w < 0) {
    throw ShapeError("conv2d: dilation/stride must be >= 1 and padding >= 0");
  }
}

struct ConvGeometry {
  int n, ci, h, w, co, kh, kw, out_h, out_w;
};

ConvGeometry conv_geometry(const Tensor& input, const ConvSpec& spec) {
  ConvGeometry g;
  g.n = input.dim(0);
  g.ci = input.dim(1);
  g.h = input.dim(2);
  g.w = input.dim(3);
  g.co = spec.out_channels;
  g.kh = spec.kernel_h;
  g.kw = spec.kernel_w;
  int span_h = g.h + 2 * spec.pad_h - spec.extent_h();
  int span_w = g.w + 2 * spec.pad_w - spec.extent_w();
  if (span_h < 0 || span_w < 0) {
    throw ShapeError("conv2d: kernel extent " + std::to_string(spec.extent_h()) + "x" +
                     std::to_string(spec.extent_w()) + " exceeds padded input " +
                     std::to_string(g.h + 2 * spec.pad_h) + "x" +
                     std::to_string(g.w + 2 * spec.pad_w));
  }
  g.out_h = span_h / spec.stride + 1;
  g.out_w = span_w / spec.stride + 1;
  return g;
}

// Pointwise convolution reduces to a channel mix; worth a dedicated path
// since 1x1 reductions and attention projections dominate the op mix.
bool is_pointwise(const ConvSpec& spec) {
  return spec.kernel_h == 1 && spec.kernel_w == 1 && spec.stride == 1 && spec.pad_h == 0 &&
         spec.pad_w == 0;
}

void pointwise_forward(const ConvGeometry& g, const double* in, const double* wt,
                       const double* bias, double* out) {
  std::int64_t plane = static_cast<std::int64_t>(g.h) * g.w;
  for (int b = 0; b < g.n; ++b) {
    const double* in_b = in + static_cast<std::int64_t>(b) * g.ci * plane;
    double* out_b = out + static_cast<std::int64_t>(b) * g.co * plane;
    for (int co = 0; co < g.co; ++co) {
      double* dst = out_b + co * plane;
      double b0 = bias ? bias[co] : 0.0;
      for (std::int64_t i = 0; i < plane; ++i) dst[i] = b0;
      for (int ci = 0; ci < g.ci; ++ci) {
        double wv = wt[static_cast<std::int64_t>(co) * g.ci + ci];
        if (wv == 0.0) continue;
        const double* src = in_b + ci * plane;
        for (std::int64_t i = 0; i < plane; ++i) dst[i] += wv * src[i];
      }
    }
  }
}

void general_forward(const ConvGeometry& g, const ConvSpec& spec, const double* in,
                     const double* wt, const double* bias, double* out) {
  std::int64_t plane_in = static_cast<std::int64_t>(g.h) * g.w;
  std::int64_t plane_out = static_cast<std::int64_t>(g.out_h) * g.out_w;
  for (int b = 0; b < g.n; ++b) {
    const double* in_b = in + static_cast<std::int64_t>(b) * g.ci * plane_in;
    double* out_b = out + static_cast<std::int64_t>(b) * g.co * plane_out;
    for (int co = 0; co < g.co; ++co) {
      const double* w_co = wt + static_cast<std::int64_t>(co) * g.ci * g.kh * g.kw;
      double* dst = out_b + co * plane_out;
      double b0 = bias ? bias[co] : 0.0;
      for (int oy = 0; oy < g.out_h; ++oy) {
        int iy0 = oy * spec.stride - spec.pad_h;
        for (int ox = 0; ox < g.out_w; ++ox) {
          int ix0 = ox * spec.stride - spec.pad_w;
          double acc = b0;
          for (int ci = 0; ci < g.ci; ++ci) {
            const double* src = in_b + ci * plane_in;
            const double* w_ci = w_co + static_cast<std::int64_t>(ci) * g.kh * g.kw;
            for (int ky = 0; ky < g.kh; ++ky) {
              int iy = iy0 + ky * spec.dilation;
              if (iy < 0 || iy >= g.h) continue;
              const double* row = src + iy * g.w;
              const double* wrow = w_ci + ky * g.kw;
              for (int kx = 0; kx < g.kw; ++kx) {
                int ix = ix0 + kx * spec.dilation;
                if (ix < 0 || ix >= g.w) continue;
                acc += row[ix] * wrow[kx];
              }
            }
          }
          dst[oy * g.out_w + ox] = acc;
        }
      }
    }
  }
}

Tensor conv2d_impl(const Tensor& input, const Tensor& weights, const Tensor* bias_ptr,
                   const ConvSpec& spec) {
  check_conv_args(input, weights, bias_ptr, spec);
  ConvGeometry g = conv_geometry(input, spec);
  Shape out_shape{g.n, g.co, g.out_h, g.out_w};
  std::vector<double> out(static_cast<size_t>(numel(out_shape)));

  const double* bias_data = bias_ptr ? bias_ptr->values().data() : nullptr;
  if (is_pointwise(spec)) {
    pointwise_forward(g, input.values().data(), weights.values().data(), bias_data, out.data());
  } else {
    general_forward(g, spec, input.values().data(), weights.values().data(), bias_data,
                    out.data());
  }

  std::vector<Tensor> parents{input, weights};
  if (bias_ptr) parents.push_back(*bias_ptr);
  bool has_bias = bias_ptr != nullptr;

  return Tensor::make(out_shape, std::move(out), std::move(parents),
                      [g, spec, has_bias](detail::Node& self) {
                        detail::Node* in_node = self.parents[0].get();
                        detail::Node* w_node = self.parents[1].get();
                        detail::Node* b_node = has_bias ? self.parents[2].get() : nullptr;
                        const double* in = in_node->values.data();
                        const double* wt = w_node->values.data();
                        const double* gout = self.grad.data();
                        double* gin = in_node->requires_grad ? in_node->grad.data() : nullptr;
                        double* gwt = w_node->requires_grad ? w_node->grad.data() : nullptr;
                        double* gb =
                            (b_node && b_node->requires_grad) ? b_node->grad.data() : nullptr;
                        std::int64_t plane_in = static_cast<std::int64_t>(g.h) * g.w;
                        std::int64_t plane_out = static_cast<std::int64_t>(g.out_h) * g.out_w;
                        for (int b = 0; b < g.n; ++b) {
                          const double* in_b = in + static_cast<std::int64_t>(b) * g.ci * plane_in;
                          double* gin_b =
                              gin ? gin + static_cast<std::int64_t>(b) * g.ci * plane_in : nullptr;
                          const double* gout_b =
                              gout + static_cast<std::int64_t>(b) * g.co * plane_out;
                          for (int co = 0; co < g.co; ++co) {
                            const double* w_co =
                                wt + static_cast<std::int64_t>(co) * g.ci * g.kh * g.kw;
                            double* gw_co =
                                gwt ? gwt + static_cast<std::int64_t>(co) * g.ci * g.kh * g.kw
                                    : nullptr;
                            const double* gdst = gout_b + co * plane_out;
                            for (int oy = 0; oy < g.out_h; ++oy) {
                              int iy0 = oy * spec.stride - spec.pad_h;
                              for (int ox = 0; ox < g.out_w; ++ox) {
                                double gv = gdst[oy * g.out_w + ox];
                                if (gv == 0.0) continue;
                                if (gb) gb[co] += gv;
                                int ix0 = ox * spec.stride - spec.pad_w;
                                for (int ci = 0; ci < g.ci; ++ci) {
                                  const double* src = in_b + ci * plane_in;
                                  double* gsrc = gin_b ? gin_b + ci * plane_in : nullptr;
                                  const double* w_ci =
                                      w_co + static_cast<std::int64_t>(ci) * g.kh * g.kw;
                                  double* gw_ci =
                                      gw_co ? gw_co + static_cast<std::int64_t>(ci) * g.kh * g.kw
                                            : nullptr;
                                  for (int ky = 0; ky < g.kh; ++ky) {
                                    int iy = iy0 + ky * spec.dilation;
                                    if (iy < 0 || iy >= g.h) continue;
                                    for (int kx = 0; kx < g.kw; ++kx) {
                                      int ix = ix0 + kx * spec.dilation;
                                      if (ix < 0 || ix >= g.w) continue;
                                      std::int64_t in_idx = iy * g.w + ix;
                                      std::int64_t w_idx = ky * g.kw + kx;
                                      if (gsrc) gsrc[in_idx] += gv * w_ci[w_idx];
                                      if (gw_ci) gw_ci[w_idx] += gv * src[in_idx];
                                    }
                                  }
                                }
                              }
                            }
                          }
                        }
                      });
}

}  // namespace

Tensor conv2d(const Tensor& input, const Tensor& weights, const ConvSpec& spec) {
  return conv2d_impl(input, weights, nullptr, spec);
}

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec) {
  return conv2d_impl(input, weights, &bias, spec);
}

Tensor asymmetric_conv(const Tensor& input, const Tensor& weights_1k, const Tensor& weights_k1,
                       const ConvSpec& spec) {
  if (spec.kernel_h != 1) {
    throw ShapeError("asymmetric_conv: spec describes the 1xk stage, kernel_h must be 1");
  }
  if (spec.stride != 1) {
    throw ShapeError("asymmetric_conv: only stride 1 is supported");
  }
  if (weights_k1.ndim() != 4 || weights_k1.dim(2) != spec.kernel_w || weights_k1.dim(3) != 1) {
    throw ShapeError("asymmetric_conv: second kernel must be (co, ci, k, 1), got " +
                     shape_string(weights_k1.shape()));
  }

  Tensor mid = conv2d(input, weights_1k, spec);  // 1xk across width

  ConvSpec col_spec;  // kx1 across height
  col_spec.kernel_h = spec.kernel_w;
  col_spec.kernel_w = 1;
  col_spec.dilation = spec.dilation;
  col_spec.stride = 1;
  col_spec.pad_h = spec.pad_w;
  col_spec.pad_w = 0;
  col_spec.in_channels = weights_k1.dim(1);
  col_spec.out_channels = weights_k1.dim(0);
  return conv2d(mid, weights_k1, col_spec);
}

}  // namespace caranet
