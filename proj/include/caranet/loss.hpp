#pragma once

#include <array>
#include <string>

#include "caranet/tensor.hpp"

namespace caranet {

/// Boundary-emphasis weights: w = 1 + gain * |boxmean_window(G) - G|.
/// G must be a (N, 1, H, W) map of exact zeros and ones; the box mean treats
/// out-of-image cells as zero and always divides by window^2.
Tensor pixel_weights(const Tensor& ground_truth, int window = 31, double gain = 5.0);

/// sum(w * bce(sigmoid(logit), target)) / sum(w), computed in logit space.
Tensor weighted_bce(const Tensor& logits, const Tensor& target, const Tensor& weights);

/// 1 - sum(w * p * t) / sum(w * (p + t - p * t)) with p = sigmoid(logits).
Tensor weighted_iou(const Tensor& logits, const Tensor& target, const Tensor& weights);

struct MapLoss {
  std::string name;
  double iou = 0.0;
  double bce = 0.0;
};

struct LossBreakdown {
  Tensor total;  // scalar, connected to the model graph
  std::array<MapLoss, 4> per_map;  // global map, then s5, s4, s3

  double value() const { return total[0]; }
};

/// Deep-supervision objective: every map is upsampled to the ground-truth
/// size, scored with weighted IoU + weighted BCE, and the four losses sum
/// into one scalar.
LossBreakdown total_loss(const Tensor& ground_truth, const Tensor& global_map, const Tensor& s5,
                         const Tensor& s4, const Tensor& s3, int weight_window = 31,
                         double weight_gain = 5.0);

}  // namespace caranet
