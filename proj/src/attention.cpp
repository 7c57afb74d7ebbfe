#include <cmath>
#include <memory>

#include "caranet/ops.hpp"

namespace caranet {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// Strides describing one attention line: `pos` steps along the attended
// axis, `line` enumerates the independent lines of a sample.
struct LineLayout {
  std::int64_t lines;      // per sample
  std::int64_t line_step;  // flat stride between lines
  std::int64_t pos_step;   // flat stride between positions on a line
  std::int64_t length;     // positions per line
};

LineLayout line_layout(const Shape& s, Axis1d axis) {
  std::int64_t h = s[2], w = s[3];
  if (axis == Axis1d::height) return {w, 1, w, h};  // one line per column
  return {h, w, 1, w};                              // one line per row
}

}  // namespace

Tensor attention_1d(const Tensor& q, const Tensor& k, const Tensor& v, Axis1d axis) {
  if (q.ndim() != 4) {
    throw ShapeError("attention_1d: need (N, C, H, W), got " + shape_string(q.shape()));
  }
  if (q.shape() != k.shape() || q.shape() != v.shape()) {
    throw ShapeError("attention_1d: q/k/v shapes differ: " + shape_string(q.shape()) + ", " +
                     shape_string(k.shape()) + ", " + shape_string(v.shape()));
  }
  const Shape& shape = q.shape();
  std::int64_t n = shape[0], c = shape[1];
  std::int64_t plane = static_cast<std::int64_t>(shape[2]) * shape[3];
  LineLayout lay = line_layout(shape, axis);
  std::int64_t len = lay.length;
  double scale = 1.0 / std::sqrt(static_cast<double>(c));

  std::vector<double> out(q.values().size(), 0.0);
  // Gates are kept for the backward sweep: n * lines * len^2 doubles.
  auto gates = std::make_shared<std::vector<double>>(
      static_cast<size_t>(n * lay.lines * len * len));

  const double* qv = q.values().data();
  const double* kv = k.values().data();
  const double* vv = v.values().data();
  for (std::int64_t b = 0; b < n; ++b) {
    for (std::int64_t line = 0; line < lay.lines; ++line) {
      std::int64_t base = b * c * plane + line * lay.line_step;
      double* gate = gates->data() + (b * lay.lines + line) * len * len;
      for (std::int64_t i = 0; i < len; ++i) {
        for (std::int64_t j = 0; j < len; ++j) {
          double dot = 0.0;
          for (std::int64_t ch = 0; ch < c; ++ch) {
            std::int64_t off = base + ch * plane;
            dot += qv[off + i * lay.pos_step] * kv[off + j * lay.pos_step];
          }
          gate[i * len + j] = logistic(dot * scale);
        }
      }
      for (std::int64_t ch = 0; ch < c; ++ch) {
        std::int64_t off = base + ch * plane;
        for (std::int64_t i = 0; i < len; ++i) {
          double acc = 0.0;
          for (std::int64_t j = 0; j < len; ++j) {
            acc += gate[i * len + j] * vv[off + j * lay.pos_step];
          }
          out[static_cast<size_t>(off + i * lay.pos_step)] = acc;
        }
      }
    }
  }

  return Tensor::make(
      shape, std::move(out), {q, k, v}, [shape, axis, gates, scale](detail::Node& self) {
        detail::Node* qn = self.parents[0].get();
        detail::Node* kn = self.parents[1].get();
        detail::Node* vn = self.parents[2].get();
        std::int64_t n = shape[0], c = shape[1];
        std::int64_t plane = static_cast<std::int64_t>(shape[2]) * shape[3];
        LineLayout lay = line_layout(shape, axis);
        std::int64_t len = lay.length;
        const double* qv = qn->values.data();
        const double* kv = kn->values.data();
        const double* vv = vn->values.data();
        const double* gout = self.grad.data();
        std::vector<double> dpre(static_cast<size_t>(len * len));
        for (std::int64_t b = 0; b < n; ++b) {
          for (std::int64_t line = 0; line < lay.lines; ++line) {
            std::int64_t base = b * c * plane + line * lay.line_step;
            const double* gate = gates->data() + (b * lay.lines + line) * len * len;
            // dpre = (dout . v^T) * gate'(pre)
            for (std::int64_t i = 0; i < len; ++i) {
              for (std::int64_t j = 0; j < len; ++j) {
                double dgate = 0.0;
                for (std::int64_t ch = 0; ch < c; ++ch) {
                  std::int64_t off = base + ch * plane;
                  dgate += gout[off + i * lay.pos_step] * vv[off + j * lay.pos_step];
                }
                double g = gate[i * len + j];
                dpre[static_cast<size_t>(i * len + j)] = dgate * g * (1.0 - g);
              }
            }
            for (std::int64_t ch = 0; ch < c; ++ch) {
              std::int64_t off = base + ch * plane;
              for (std::int64_t i = 0; i < len; ++i) {
                std::int64_t pi = off + i * lay.pos_step;
                double dq_acc = 0.0;
                double dv_acc = 0.0;
                for (std::int64_t j = 0; j < len; ++j) {
                  std::int64_t pj = off + j * lay.pos_step;
                  double dp = dpre[static_cast<size_t>(i * len + j)];
                  dq_acc += dp * kv[pj];
                  if (kn->requires_grad) kn->grad[static_cast<size_t>(pj)] += dp * scale * qv[pi];
                  dv_acc += gate[j * len + i] * gout[pj];
                }
                if (qn->requires_grad) qn->grad[static_cast<size_t>(pi)] += dq_acc * scale;
                if (vn->requires_grad) vn->grad[static_cast<size_t>(pi)] += dv_acc;
              }
            }
          }
        }
      });
}

}  // namespace caranet
