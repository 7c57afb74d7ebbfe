#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "caranet/tensor.hpp"

namespace caranet {

/// Seeded random source. Same seed, same call sequence, same bits.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(engine_);
  }

  std::vector<double> normal_vector(std::int64_t count, double mean, double stddev) {
    std::vector<double> out(static_cast<size_t>(count));
    for (double& v : out) v = normal(mean, stddev);
    return out;
  }

  Tensor normal_tensor(const Shape& shape, double mean = 0.0, double stddev = 1.0,
                       bool requires_grad = false) {
    return Tensor::from_values(shape, normal_vector(numel(shape), mean, stddev), requires_grad);
  }
  Tensor uniform_tensor(const Shape& shape, double lo = 0.0, double hi = 1.0,
                        bool requires_grad = false) {
    std::vector<double> out(static_cast<size_t>(numel(shape)));
    for (double& v : out) v = uniform(lo, hi);
    return Tensor::from_values(shape, std::move(out), requires_grad);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace caranet
