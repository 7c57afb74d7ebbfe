#include "caranet/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace caranet {

Adam::Adam(ParamStore& store, const AdamConfig& config) : store_(store), config_(config) {
  m_.reserve(store.entries().size());
  v_.reserve(store.entries().size());
  for (const ParamStore::Entry& e : store.entries()) {
    m_.emplace_back(static_cast<size_t>(e.tensor.size()), 0.0);
    v_.emplace_back(static_cast<size_t>(e.tensor.size()), 0.0);
  }
}

void Adam::step() {
  ++step_count_;
  double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  for (size_t p = 0; p < store_.entries().size(); ++p) {
    ParamStore::Entry& entry = store_.entries()[p];
    const std::vector<double>& grad = entry.tensor.grad();
    if (grad.empty()) {
      throw std::logic_error("adam: parameter " + entry.name + " has no gradient");
    }
    std::vector<double>& values = entry.tensor.leaf_values();
    std::vector<double>& m = m_[p];
    std::vector<double>& v = v_[p];
    for (size_t i = 0; i < values.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad[i] * grad[i];
      double m_hat = m[i] / bias1;
      double v_hat = v[i] / bias2;
      values[i] -= config_.lr * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace caranet
