#include "caranet/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace caranet {

namespace {

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() != sb.size()) {
    throw ShapeError(std::string(op) + ": rank mismatch " + shape_string(sa) + " vs " +
                     shape_string(sb));
  }
  for (size_t i = 0; i < sa.size(); ++i) {
    if (sa[i] != sb[i]) {
      throw ShapeError(std::string(op) + ": axis " + std::to_string(i) + " mismatch " +
                       shape_string(sa) + " vs " + shape_string(sb));
    }
  }
}


}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a[static_cast<std::int64_t>(i)] + b[static_cast<std::int64_t>(i)];
  return Tensor::make(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    detail::Node* pa = self.parents[0].get();
    detail::Node* pb = self.parents[1].get();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) pa->grad[i] += self.grad[i];
      if (pb->requires_grad) pb->grad[i] += self.grad[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  return Tensor::make(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    detail::Node* pa = self.parents[0].get();
    detail::Node* pb = self.parents[1].get();
    for (size_t i = 0; i < self.grad.size(); ++i) {
      if (pa->requires_grad) pa->grad[i] += self.grad[i] * pb->values[i];
      if (pb->requires_grad) pb->grad[i] += self.grad[i] * pa->values[i];
    }
  });
}

Tensor elementwise(const Tensor& a, const Tensor& b, ElemOp op) {
  return op == ElemOp::add ? add(a, b) : mul(a, b);
}

Tensor affine(const Tensor& x, double scale, double shift) {
  std::vector<double> out(x.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = scale * x.values()[i] + shift;
  return Tensor::make(x.shape(), std::move(out), {x}, [scale](detail::Node& self) {
    detail::Node* p = self.parents[0].get();
    if (!p->requires_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += scale * self.grad[i];
  });
}

Tensor relu(const Tensor& x) {
  std::vector<double> out(x.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] > 0.0 ? x.values()[i] : 0.0;
  return Tensor::make(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    detail::Node* p = self.parents[0].get();
    if (!p->requires_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i) {
      if (p->values[i] > 0.0) p->grad[i] += self.grad[i];
    }
  });
}

namespace {

// Overflow-safe logistic; output stays in (0, 1) for |x| up to ~700.
double stable_sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.values().size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(x.values()[i]);
  return Tensor::make(x.shape(), std::move(out), {x}, [](detail::Node& self) {
    detail::Node* p = self.parents[0].get();
    if (!p->requires_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i) {
      double s = self.values[i];
      p->grad[i] += self.grad[i] * s * (1.0 - s);
    }
  });
}

Tensor softmax(const Tensor& x, int axis) {
  const Shape& shape = x.shape();
  if (axis < 0 || axis >= static_cast<int>(shape.size())) {
    throw ShapeError("softmax: axis " + std::to_string(axis) + " invalid for shape " +
                     shape_string(shape));
  }
  std::int64_t axis_len = shape[static_cast<size_t>(axis)];
  std::int64_t inner = 1;
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) inner *= shape[i];
  std::int64_t outer = numel(shape) / (axis_len * inner);

  std::vector<double> out(x.values().size());
  for (std::int64_t o = 0; o < outer; ++o) {
    for (std::int64_t in = 0; in < inner; ++in) {
      std::int64_t base = o * axis_len * inner + in;
      double max_v = x.values()[static_cast<size_t>(base)];
      for (std::int64_t k = 1; k < axis_len; ++k) {
        max_v = std::max(max_v, x.values()[static_cast<size_t>(base + k * inner)]);
      }
      double denom = 0.0;
      for (std::int64_t k = 0; k < axis_len; ++k) {
        double e = std::exp(x.values()[static_cast<size_t>(base + k * inner)] - max_v);
        out[static_cast<size_t>(base + k * inner)] = e;
        denom += e;
      }
      for (std::int64_t k = 0; k < axis_len; ++k) {
        out[static_cast<size_t>(base + k * inner)] /= denom;
      }
    }
  }
  return Tensor::make(shape, std::move(out), {x},
                      [axis_len, inner, outer](detail::Node& self) {
                        detail::Node* p = self.parents[0].get();
                        if (!p->requires_grad) return;
                        // dx = y * (dy - sum(dy * y)) per slice
                        for (std::int64_t o = 0; o < outer; ++o) {
                          for (std::int64_t in = 0; in < inner; ++in) {
                            std::int64_t base = o * axis_len * inner + in;
                            double dot = 0.0;
                            for (std::int64_t k = 0; k < axis_len; ++k) {
                              size_t idx = static_cast<size_t>(base + k * inner);
                              dot += self.grad[idx] * self.values[idx];
                            }
                            for (std::int64_t k = 0; k < axis_len; ++k) {
                              size_t idx = static_cast<size_t>(base + k * inner);
                              p->grad[idx] += self.values[idx] * (self.grad[idx] - dot);
                            }
                          }
                        }
                      });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.values()) total += v;
  return Tensor::make({1}, {total}, {x}, [](detail::Node& self) {
    detail::Node* p = self.parents[0].get();
    if (!p->requires_grad) return;
    double g = self.grad[0];
    for (double& d : p->grad) d += g;
  });
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2) {
    throw ShapeError("matmul: need 2-d operands, got " + shape_string(a.shape()) + " and " +
                     shape_string(b.shape()));
  }
  int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
  if (k != k2) {
    throw ShapeError("matmul: inner axis mismatch " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (int i = 0; i < m; ++i) {
    for (int p = 0; p < k; ++p) {
      double av_ip = av[i * k + p];
      for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += av_ip * bv[p * n + j];
    }
  }
  return Tensor::make({m, n}, std::move(out), {a, b}, [m, k, n](detail::Node& self) {
    detail::Node* pa = self.parents[0].get();
    detail::Node* pb = self.parents[1].get();
    // dA = dY . B^T, dB = A^T . dY
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) {
        double g = self.grad[static_cast<size_t>(i) * n + j];
        if (g == 0.0) continue;
        for (int p = 0; p < k; ++p) {
          if (pa->requires_grad) pa->grad[static_cast<size_t>(i) * k + p] += g * pb->values[static_cast<size_t>(p) * n + j];
          if (pb->requires_grad) pb->grad[static_cast<size_t>(p) * n + j] += g * pa->values[static_cast<size_t>(i) * k + p];
        }
      }
    }
  });
}

Tensor bilinear_resize(const Tensor& input, int target_h, int target_w) {
  if (input.ndim() != 4) {
    throw ShapeError("bilinear_resize: need (N, C, H, W), got " + shape_string(input.shape()));
  }
  if (target_h < 1 || target_w < 1) {
    throw ShapeError("bilinear_resize: target dims must be >= 1, got " +
                     std::to_string(target_h) + "x" + std::to_string(target_w));
  }
  int n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
  if (target_h == h && target_w == w) {
    // Identity resize is exact.
    return Tensor::make(input.shape(), input.values(), {input}, [](detail::Node& self) {
      detail::Node* p = self.parents[0].get();
      if (!p->requires_grad) return;
      for (size_t i = 0; i < self.grad.size(); ++i) p->grad[i] += self.grad[i];
    });
  }

  // Half-pixel source coordinates, edge clamped.
  struct Tap {
    int lo, hi;
    double t;
  };
  auto make_taps = [](int in_len, int out_len) {
    std::vector<Tap> taps(static_cast<size_t>(out_len));
    double scale = static_cast<double>(in_len) / out_len;
    for (int i = 0; i < out_len; ++i) {
      double src = (i + 0.5) * scale - 0.5;
      double lo_f = std::floor(src);
      double t = src - lo_f;
      int lo = static_cast<int>(lo_f);
      int hi = lo + 1;
      lo = std::clamp(lo, 0, in_len - 1);
      hi = std::clamp(hi, 0, in_len - 1);
      taps[static_cast<size_t>(i)] = {lo, hi, t};
    }
    return taps;
  };
  auto ys = make_taps(h, target_h);
  auto xs = make_taps(w, target_w);

  Shape out_shape{n, c, target_h, target_w};
  std::vector<double> out(static_cast<size_t>(numel(out_shape)));
  const double* in = input.values().data();
  std::int64_t plane_in = static_cast<std::int64_t>(h) * w;
  std::int64_t plane_out = static_cast<std::int64_t>(target_h) * target_w;
  for (int nc = 0; nc < n * c; ++nc) {
    const double* src = in + nc * plane_in;
    double* dst = out.data() + nc * plane_out;
    for (int oy = 0; oy < target_h; ++oy) {
      const Tap& ty = ys[static_cast<size_t>(oy)];
      for (int ox = 0; ox < target_w; ++ox) {
        const Tap& tx = xs[static_cast<size_t>(ox)];
        double top = (1.0 - tx.t) * src[ty.lo * w + tx.lo] + tx.t * src[ty.lo * w + tx.hi];
        double bot = (1.0 - tx.t) * src[ty.hi * w + tx.lo] + tx.t * src[ty.hi * w + tx.hi];
        dst[oy * target_w + ox] = (1.0 - ty.t) * top + ty.t * bot;
      }
    }
  }
  return Tensor::make(out_shape, std::move(out), {input},
                      [n, c, h, w, target_h, target_w, ys, xs](detail::Node& self) {
                        detail::Node* p = self.parents[0].get();
                        if (!p->requires_grad) return;
                        std::int64_t plane_in = static_cast<std::int64_t>(h) * w;
                        std::int64_t plane_out = static_cast<std::int64_t>(target_h) * target_w;
                        for (int nc = 0; nc < n * c; ++nc) {
                          double* gsrc = p->grad.data() + nc * plane_in;
                          const double* gdst = self.grad.data() + nc * plane_out;
                          for (int oy = 0; oy < target_h; ++oy) {
                            const auto& ty = ys[static_cast<size_t>(oy)];
                            for (int ox = 0; ox < target_w; ++ox) {
                              const auto& tx = xs[static_cast<size_t>(ox)];
                              double g = gdst[oy * target_w + ox];
                              if (g == 0.0) continue;
                              gsrc[ty.lo * w + tx.lo] += (1.0 - ty.t) * (1.0 - tx.t) * g;
                              gsrc[ty.lo * w + tx.hi] += (1.0 - ty.t) * tx.t * g;
                              gsrc[ty.hi * w + tx.lo] += ty.t * (1.0 - tx.t) * g;
                              gsrc[ty.hi * w + tx.hi] += ty.t * tx.t * g;
                            }
                          }
                        }
                      });
}

namespace {

struct PoolGeometry {
  int n, c, h, w, out_h, out_w;
};

PoolGeometry pool_geometry(const Tensor& input, int window, int stride, int padding,
                           const char* op) {
  if (input.ndim() != 4) {
    throw ShapeError(std::string(op) + ": need (N, C, H, W), got " + shape_string(input.shape()));
  }
  if (window < 1) throw ShapeError(std::string(op) + ": window must be >= 1");
  if (stride < 1) throw ShapeError(std::string(op) + ": stride must be >= 1");
  if (padding < 0) throw ShapeError(std::string(op) + ": padding must be >= 0");
  PoolGeometry g{input.dim(0), input.dim(1), input.dim(2), input.dim(3), 0, 0};
  int padded_h = g.h + 2 * padding;
  int padded_w = g.w + 2 * padding;
  if (window > padded_h || window > padded_w) {
    throw ShapeError(std::string(op) + ": window " + std::to_string(window) +
                     " larger than padded input " + std::to_string(padded_h) + "x" +
                     std::to_string(padded_w));
  }
  g.out_h = (padded_h - window) / stride + 1;
  g.out_w = (padded_w - window) / stride + 1;
  return g;
}

}  // namespace

Tensor avg_pool(const Tensor& input, int window, int stride, int padding) {
  PoolGeometry g = pool_geometry(input, window, stride, padding, "avg_pool");
  Shape out_shape{g.n, g.c, g.out_h, g.out_w};
  std::vector<double> out(static_cast<size_t>(numel(out_shape)));
  const double* in = input.values().data();
  double inv_area = 1.0 / (static_cast<double>(window) * window);
  std::int64_t plane_in = static_cast<std::int64_t>(g.h) * g.w;
  std::int64_t plane_out = static_cast<std::int64_t>(g.out_h) * g.out_w;
  // Padding cells count as zeros; the divisor is always window^2.
  for (int nc = 0; nc < g.n * g.c; ++nc) {
    const double* src = in + nc * plane_in;
    double* dst = out.data() + nc * plane_out;
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        double acc = 0.0;
        for (int ky = 0; ky < window; ++ky) {
          int iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int kx = 0; kx < window; ++kx) {
            int ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= g.w) continue;
            acc += src[iy * g.w + ix];
          }
        }
        dst[oy * g.out_w + ox] = acc * inv_area;
      }
    }
  }
  return Tensor::make(out_shape, std::move(out), {input},
                      [g, window, stride, padding, inv_area](detail::Node& self) {
                        detail::Node* p = self.parents[0].get();
                        if (!p->requires_grad) return;
                        std::int64_t plane_in = static_cast<std::int64_t>(g.h) * g.w;
                        std::int64_t plane_out = static_cast<std::int64_t>(g.out_h) * g.out_w;
                        for (int nc = 0; nc < g.n * g.c; ++nc) {
                          double* gsrc = p->grad.data() + nc * plane_in;
                          const double* gdst = self.grad.data() + nc * plane_out;
                          for (int oy = 0; oy < g.out_h; ++oy) {
                            for (int ox = 0; ox < g.out_w; ++ox) {
                              double gshare = gdst[oy * g.out_w + ox] * inv_area;
                              if (gshare == 0.0) continue;
                              for (int ky = 0; ky < window; ++ky) {
                                int iy = oy * stride - padding + ky;
                                if (iy < 0 || iy >= g.h) continue;
                                for (int kx = 0; kx < window; ++kx) {
                                  int ix = ox * stride - padding + kx;
                                  if (ix < 0 || ix >= g.w) continue;
                                  gsrc[iy * g.w + ix] += gshare;
                                }
                              }
                            }
                          }
                        }
                      });
}

Tensor max_pool(const Tensor& input, int window, int stride, int padding) {
  PoolGeometry g = pool_geometry(input, window, stride, padding, "max_pool");
  Shape out_shape{g.n, g.c, g.out_h, g.out_w};
  std::vector<double> out(static_cast<size_t>(numel(out_shape)));
  // Gradient routes to the first maximum in scan order.
  auto argmax = std::make_shared<std::vector<std::int64_t>>(out.size(), -1);
  const double* in = input.values().data();
  std::int64_t plane_in = static_cast<std::int64_t>(g.h) * g.w;
  std::int64_t plane_out = static_cast<std::int64_t>(g.out_h) * g.out_w;
  for (int nc = 0; nc < g.n * g.c; ++nc) {
    const double* src = in + nc * plane_in;
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        std::int64_t best_idx = -1;
        for (int ky = 0; ky < window; ++ky) {
          int iy = oy * stride - padding + ky;
          for (int kx = 0; kx < window; ++kx) {
            int ix = ox * stride - padding + kx;
            double v = (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w) ? 0.0 : src[iy * g.w + ix];
            if (v > best) {
              best = v;
              best_idx = (iy < 0 || iy >= g.h || ix < 0 || ix >= g.w)
                             ? -1
                             : nc * plane_in + iy * g.w + ix;
            }
          }
        }
        std::int64_t flat = nc * plane_out + oy * g.out_w + ox;
        out[static_cast<size_t>(flat)] = best;
        (*argmax)[static_cast<size_t>(flat)] = best_idx;
      }
    }
  }
  return Tensor::make(out_shape, std::move(out), {input}, [argmax](detail::Node& self) {
    detail::Node* p = self.parents[0].get();
    if (!p->requires_grad) return;
    for (size_t i = 0; i < self.grad.size(); ++i) {
      std::int64_t src = (*argmax)[i];
      if (src >= 0) p->grad[static_cast<size_t>(src)] += self.grad[i];
    }
  });
}

Tensor add_channel_bias(const Tensor& x, const Tensor& bias) {
  if (x.ndim() != 4) {
    throw ShapeError("add_channel_bias: need (N, C, H, W), got " + shape_string(x.shape()));
  }
  if (bias.ndim() != 1 || bias.dim(0) != x.dim(1)) {
    throw ShapeError("add_channel_bias: bias " + shape_string(bias.shape()) +
                     " does not match channel axis of " + shape_string(x.shape()));
  }
  int n = x.dim(0), c = x.dim(1);
  std::int64_t plane = static_cast<std::int64_t>(x.dim(2)) * x.dim(3);
  std::vector<double> out(x.values().size());
  for (int b = 0; b < n; ++b) {
    for (int ch = 0; ch < c; ++ch) {
      const double* src = x.values().data() + (static_cast<std::int64_t>(b) * c + ch) * plane;
      double* dst = out.data() + (static_cast<std::int64_t>(b) * c + ch) * plane;
      double bv = bias[ch];
      for (std::int64_t i = 0; i < plane; ++i) dst[i] = src[i] + bv;
    }
  }
  return Tensor::make(x.shape(), std::move(out), {x, bias}, [n, c, plane](detail::Node& self) {
    detail::Node* px = self.parents[0].get();
    detail::Node* pb = self.parents[1].get();
    for (int b = 0; b < n; ++b) {
      for (int ch = 0; ch < c; ++ch) {
        const double* g = self.grad.data() + (static_cast<std::int64_t>(b) * c + ch) * plane;
        if (px->requires_grad) {
          double* gx = px->grad.data() + (static_cast<std::int64_t>(b) * c + ch) * plane;
          for (std::int64_t i = 0; i < plane; ++i) gx[i] += g[i];
        }
        if (pb->requires_grad) {
          double acc = 0.0;
          for (std::int64_t i = 0; i < plane; ++i) acc += g[i];
          pb->grad[static_cast<size_t>(ch)] += acc;
        }
      }
    }
  });
}

Tensor concat_channels(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw ShapeError("concat_channels: no inputs");
  const Tensor& first = parts.front();
  if (first.ndim() != 4) {
    throw ShapeError("concat_channels: need (N, C, H, W), got " + shape_string(first.shape()));
  }
  int n = first.dim(0), h = first.dim(2), w = first.dim(3);
  int total_c = 0;
  for (const Tensor& t : parts) {
    if (t.ndim() != 4 || t.dim(0) != n || t.dim(2) != h || t.dim(3) != w) {
      throw ShapeError("concat_channels: incompatible part shape " + shape_string(t.shape()) +
                       " vs " + shape_string(first.shape()));
    }
    total_c += t.dim(1);
  }
  Shape out_shape{n, total_c, h, w};
  std::vector<double> out(static_cast<size_t>(numel(out_shape)));
  std::int64_t plane = static_cast<std::int64_t>(h) * w;
  std::int64_t offset_c = 0;
  for (const Tensor& t : parts) {
    int c = t.dim(1);
    for (int b = 0; b < n; ++b) {
      const double* src = t.values().data() + static_cast<std::int64_t>(b) * c * plane;
      double* dst = out.data() + (static_cast<std::int64_t>(b) * total_c + offset_c) * plane;
      std::copy(src, src + static_cast<std::int64_t>(c) * plane, dst);
    }
    offset_c += c;
  }
  std::vector<Tensor> parents(parts.begin(), parts.end());
  return Tensor::make(out_shape, std::move(out), parents,
                      [n, total_c, plane](detail::Node& self) {
                        std::int64_t offset_c = 0;
                        for (auto& parent : self.parents) {
                          int c = parent->shape[1];
                          if (parent->requires_grad) {
                            for (int b = 0; b < n; ++b) {
                              const double* gsrc =
                                  self.grad.data() +
                                  (static_cast<std::int64_t>(b) * total_c + offset_c) * plane;
                              double* gdst =
                                  parent->grad.data() + static_cast<std::int64_t>(b) * c * plane;
                              for (std::int64_t i = 0; i < static_cast<std::int64_t>(c) * plane; ++i) {
                                gdst[i] += gsrc[i];
                              }
                            }
                          }
                          offset_c += c;
                        }
                      });
}

Tensor slice_channels(const Tensor& x, int begin, int end) {
  if (x.ndim() != 4) {
    throw ShapeError("slice_channels: need (N, C, H, W), got " + shape_string(x.shape()));
  }
  int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  if (begin < 0 || end > c || begin >= end) {
    throw ShapeError("slice_channels: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") invalid for " + std::to_string(c) + " channels");
  }
  int out_c = end - begin;
  Shape out_shape{n, out_c, h, w};
  std::vector<double> out(static_cast<size_t>(numel(out_shape)));
  std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (int b = 0; b < n; ++b) {
    const double* src = x.values().data() + (static_cast<std::int64_t>(b) * c + begin) * plane;
    double* dst = out.data() + static_cast<std::int64_t>(b) * out_c * plane;
    std::copy(src, src + static_cast<std::int64_t>(out_c) * plane, dst);
  }
  return Tensor::make(out_shape, std::move(out), {x}, [n, c, begin, out_c, plane](detail::Node& self) {
    detail::Node* p = self.parents[0].get();
    if (!p->requires_grad) return;
    for (int b = 0; b < n; ++b) {
      const double* gsrc = self.grad.data() + static_cast<std::int64_t>(b) * out_c * plane;
      double* gdst = p->grad.data() + (static_cast<std::int64_t>(b) * c + begin) * plane;
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(out_c) * plane; ++i) gdst[i] += gsrc[i];
    }
  });
}

Tensor repeat_channels(const Tensor& x, int times) {
  if (x.ndim() != 4) {
    throw ShapeError("repeat_channels: need (N, C, H, W), got " + shape_string(x.shape()));
  }
  if (times < 1) throw ShapeError("repeat_channels: times must be >= 1");
  int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  Shape out_shape{n, c * times, h, w};
  std::vector<double> out(static_cast<size_t>(numel(out_shape)));
  std::int64_t plane = static_cast<std::int64_t>(h) * w;
  for (int b = 0; b < n; ++b) {
    for (int r = 0; r < times; ++r) {
      const double* src = x.values().data() + static_cast<std::int64_t>(b) * c * plane;
      double* dst = out.data() + (static_cast<std::int64_t>(b) * times + r) * c * plane;
      std::copy(src, src + static_cast<std::int64_t>(c) * plane, dst);
    }
  }
  return Tensor::make(out_shape, std::move(out), {x}, [n, c, times, plane](detail::Node& self) {
    detail::Node* p = self.parents[0].get();
    if (!p->requires_grad) return;
    for (int b = 0; b < n; ++b) {
      double* gdst = p->grad.data() + static_cast<std::int64_t>(b) * c * plane;
      for (int r = 0; r < times; ++r) {
        const double* gsrc =
            self.grad.data() + (static_cast<std::int64_t>(b) * times + r) * c * plane;
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(c) * plane; ++i) gdst[i] += gsrc[i];
      }
    }
  });
}

}  // namespace caranet
