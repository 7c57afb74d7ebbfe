#include "caranet/loss.hpp"

#include <cmath>

#include "caranet/ops.hpp"

namespace caranet {

namespace {

void check_map(const Tensor& t, const char* what) {
  if (t.ndim() != 4 || t.channels() != 1) {
    throw ShapeError(std::string(what) + ": need a (N, 1, H, W) map, got " +
                     shape_string(t.shape()));
  }
}

void check_triple(const Tensor& logits, const Tensor& target, const Tensor& weights,
                  const char* what) {
  check_map(logits, what);
  if (target.shape() != logits.shape() || weights.shape() != logits.shape()) {
    throw ShapeError(std::string(what) + ": shape mismatch, logits " +
                     shape_string(logits.shape()) + ", target " + shape_string(target.shape()) +
                     ", weights " + shape_string(weights.shape()));
  }
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

Tensor pixel_weights(const Tensor& ground_truth, int window, double gain) {
  check_map(ground_truth, "pixel_weights");
  if (window < 1 || window % 2 == 0) {
    throw ShapeError("pixel_weights: window must be odd and positive");
  }
  const std::vector<double>& g = ground_truth.values();
  for (double v : g) {
    if (v != 0.0 && v != 1.0) {
      throw ShapeError("pixel_weights: ground truth must contain exact zeros and ones");
    }
  }
  int n = ground_truth.dim(0), h = ground_truth.dim(2), w = ground_truth.dim(3);
  int radius = window / 2;
  double area = static_cast<double>(window) * window;
  std::vector<double> out(g.size());
  std::vector<double> row_sums(static_cast<size_t>(h) * w);
  // Binary input keeps both passes of the separable box sum exact, so the
  // result is identical to a direct windowed sum.
  for (int b = 0; b < n; ++b) {
    const double* src = g.data() + static_cast<std::int64_t>(b) * h * w;
    double* dst = out.data() + static_cast<std::int64_t>(b) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          int xx = x + k;
          if (xx >= 0 && xx < w) acc += src[y * w + xx];
        }
        row_sums[static_cast<size_t>(y) * w + x] = acc;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          int yy = y + k;
          if (yy >= 0 && yy < h) acc += row_sums[static_cast<size_t>(yy) * w + x];
        }
        dst[y * w + x] = 1.0 + gain * std::abs(acc / area - src[y * w + x]);
      }
    }
  }
  return Tensor::from_values(ground_truth.shape(), std::move(out));
}

Tensor weighted_bce(const Tensor& logits, const Tensor& target, const Tensor& weights) {
  check_triple(logits, target, weights, "weighted_bce");
  const std::vector<double>& x = logits.values();
  const std::vector<double>& t = target.values();
  const std::vector<double>& w = weights.values();
  double weight_sum = 0.0;
  double loss_sum = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    loss_sum += w[i] * (softplus(x[i]) - t[i] * x[i]);
    weight_sum += w[i];
  }
  double value = loss_sum / weight_sum;
  return Tensor::make({1}, {value}, {logits, target, weights},
                      [weight_sum](detail::Node& self) {
                        detail::Node* lx = self.parents[0].get();
                        if (!lx->requires_grad) return;
                        detail::Node* lt = self.parents[1].get();
                        detail::Node* lw = self.parents[2].get();
                        double g = self.grad[0] / weight_sum;
                        for (size_t i = 0; i < lx->values.size(); ++i) {
                          lx->grad[i] += g * lw->values[i] *
                                         (logistic(lx->values[i]) - lt->values[i]);
                        }
                      });
}

Tensor weighted_iou(const Tensor& logits, const Tensor& target, const Tensor& weights) {
  check_triple(logits, target, weights, "weighted_iou");
  const std::vector<double>& x = logits.values();
  const std::vector<double>& t = target.values();
  const std::vector<double>& w = weights.values();
  double inter = 0.0;
  double union_ = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    double p = logistic(x[i]);
    inter += w[i] * p * t[i];
    union_ += w[i] * (p + t[i] - p * t[i]);
  }
  double value = 1.0 - inter / union_;
  return Tensor::make(
      {1}, {value}, {logits, target, weights}, [inter, union_](detail::Node& self) {
        detail::Node* lx = self.parents[0].get();
        if (!lx->requires_grad) return;
        detail::Node* lt = self.parents[1].get();
        detail::Node* lw = self.parents[2].get();
        double g = self.grad[0];
        double u2 = union_ * union_;
        for (size_t i = 0; i < lx->values.size(); ++i) {
          double p = logistic(lx->values[i]);
          double t = lt->values[i];
          double wv = lw->values[i];
          // d(1 - I/U)/dp = -(dI * U - I * dU) / U^2
          double dp = -(wv * t * union_ - inter * wv * (1.0 - t)) / u2;
          lx->grad[i] += g * dp * p * (1.0 - p);
        }
      });
}

LossBreakdown total_loss(const Tensor& ground_truth, const Tensor& global_map, const Tensor& s5,
                         const Tensor& s4, const Tensor& s3, int weight_window,
                         double weight_gain) {
  check_map(ground_truth, "total_loss");
  int h = ground_truth.height(), w = ground_truth.width();
  Tensor weights = pixel_weights(ground_truth, weight_window, weight_gain);

  LossBreakdown breakdown;
  const std::array<std::pair<const char*, const Tensor*>, 4> maps{
      {{"global", &global_map}, {"s5", &s5}, {"s4", &s4}, {"s3", &s3}}};
  Tensor total;
  for (size_t i = 0; i < maps.size(); ++i) {
    Tensor up = bilinear_resize(*maps[i].second, h, w);
    Tensor iou = weighted_iou(up, ground_truth, weights);
    Tensor bce = weighted_bce(up, ground_truth, weights);
    breakdown.per_map[i] = {maps[i].first, iou[0], bce[0]};
    Tensor map_loss = add(iou, bce);
    total = i == 0 ? map_loss : add(total, map_loss);
  }
  breakdown.total = total;
  return breakdown;
}

}  // namespace caranet
