#include "caranet/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "caranet/rng.hpp"

namespace caranet {

double max_relative_grad_error(const std::function<Tensor()>& forward,
                               std::vector<Tensor> leaves, int samples_per_leaf, double step,
                               std::uint64_t probe_seed) {
  // Leaf gradients accumulate across backward sweeps until cleared, so drop
  // anything left over from earlier checks against the same leaves.
  for (Tensor& leaf : leaves) {
    if (leaf.requires_grad() && !leaf.grad().empty()) leaf.zero_grad();
  }
  Tensor loss = forward();
  loss.backward();

  Rng picker(probe_seed);
  double worst = 0.0;
  for (Tensor& leaf : leaves) {
    if (!leaf.requires_grad()) continue;
    const std::vector<double>& analytic = leaf.grad();
    std::int64_t count = leaf.size();
    std::vector<std::int64_t> coords;
    if (count <= samples_per_leaf) {
      coords.resize(static_cast<size_t>(count));
      std::iota(coords.begin(), coords.end(), 0);
    } else {
      for (int s = 0; s < samples_per_leaf; ++s) coords.push_back(picker.uniform_int(0, count - 1));
    }
    for (std::int64_t idx : coords) {
      double saved = leaf.leaf_values()[static_cast<size_t>(idx)];
      leaf.leaf_values()[static_cast<size_t>(idx)] = saved + step;
      double up = forward()[0];
      leaf.leaf_values()[static_cast<size_t>(idx)] = saved - step;
      double down = forward()[0];
      leaf.leaf_values()[static_cast<size_t>(idx)] = saved;
      double fd = (up - down) / (2.0 * step);
      double rel = std::abs(analytic[static_cast<size_t>(idx)] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, rel);
    }
    leaf.zero_grad();
  }
  return worst;
}

GradCheckResult check_gradients(const std::string& name, const std::function<Tensor()>& forward,
                                std::vector<Tensor> leaves, double tolerance,
                                int samples_per_leaf, double step) {
  GradCheckResult result;
  result.name = name;
  result.tolerance = tolerance;
  result.max_rel_err =
      max_relative_grad_error(forward, std::move(leaves), samples_per_leaf, step);
  result.pass = result.max_rel_err < tolerance;
  return result;
}

}  // namespace caranet
