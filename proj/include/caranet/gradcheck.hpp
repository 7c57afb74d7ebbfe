#pragma once

#include <functional>
#include <string>
#include <vector>

#include "caranet/tensor.hpp"

namespace caranet {

/// Outcome of one finite-difference comparison.
struct GradCheckResult {
  std::string name;
  double max_rel_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Compares analytic gradients against central finite differences.
///
/// `forward` must rebuild the computation from the current leaf values and
/// return a scalar. Leaves are probed at up to `samples_per_leaf` coordinates
/// (all of them when the leaf is small); the relative error is
/// |analytic - fd| / max(1, |fd|).
double max_relative_grad_error(const std::function<Tensor()>& forward,
                               std::vector<Tensor> leaves, int samples_per_leaf = 8,
                               double step = 1e-5, std::uint64_t probe_seed = 0x5eed);

GradCheckResult check_gradients(const std::string& name, const std::function<Tensor()>& forward,
                                std::vector<Tensor> leaves, double tolerance = 1e-4,
                                int samples_per_leaf = 8, double step = 1e-5);

/// Finite-difference suite over every differentiable op plus the full model.
/// Covers what the `gradcheck` CLI command reports.
std::vector<GradCheckResult> run_gradcheck_suite(std::uint64_t seed = 7);

}  // namespace caranet
