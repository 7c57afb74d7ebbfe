#pragma once

#include <cstdint>
#include <vector>

#include "caranet/tensor.hpp"

namespace caranet {

/// Two-dimensional 0/1 grid: ground truth and thresholded predictions.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;  // row-major, values 0 or 1

  BinaryMask() = default;
  BinaryMask(int h, int w) : height(h), width(w), data(static_cast<size_t>(h) * w, 0) {}

  std::uint8_t at(int y, int x) const { return data[static_cast<size_t>(y) * width + x]; }
  std::uint8_t& at(int y, int x) { return data[static_cast<size_t>(y) * width + x]; }

  std::int64_t foreground_count() const {
    std::int64_t count = 0;
    for (std::uint8_t v : data) count += v;
    return count;
  }

  /// Binarise a probability map (values, row-major) at `threshold`; a pixel
  /// is foreground when value > threshold.
  static BinaryMask threshold_map(const std::vector<double>& values, int h, int w,
                                  double threshold = 0.5) {
    BinaryMask mask(h, w);
    for (size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = values[i] > threshold ? 1 : 0;
    return mask;
  }

  /// (1, 1, H, W) float tensor of exact zeros and ones.
  Tensor to_tensor() const {
    std::vector<double> values(data.size());
    for (size_t i = 0; i < data.size(); ++i) values[i] = data[i] ? 1.0 : 0.0;
    return Tensor::from_values({1, 1, height, width}, std::move(values));
  }
};

}  // namespace caranet
