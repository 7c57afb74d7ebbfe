#pragma once

#include <cstdint>
#include <vector>

#include "caranet/layers.hpp"

namespace caranet {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Bias-corrected Adam over a parameter store. Moment buffers follow the
/// store's registration order.
class Adam {
 public:
  Adam(ParamStore& store, const AdamConfig& config = {});

  /// Applies one update from the gradients accumulated on the parameters.
  /// Throws if any parameter has no gradient buffer yet.
  void step();

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return config_; }

  // Serialized with checkpoints.
  std::vector<std::vector<double>>& first_moments() { return m_; }
  std::vector<std::vector<double>>& second_moments() { return v_; }
  void set_step_count(std::int64_t t) { step_count_ = t; }

 private:
  ParamStore& store_;
  AdamConfig config_;
  std::int64_t step_count_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace caranet
