#pragma once

#include <cmath>
#include <vector>

#include "caranet/ops.hpp"
#include "caranet/rng.hpp"
#include "caranet/tensor.hpp"

namespace testutil {

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

inline double max_abs_diff(const caranet::Tensor& a, const caranet::Tensor& b) {
  return max_abs_diff(a.values(), b.values());
}

inline bool bitwise_equal(const caranet::Tensor& a, const caranet::Tensor& b) {
  if (a.shape() != b.shape()) return false;
  for (std::int64_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

}  // namespace testutil
