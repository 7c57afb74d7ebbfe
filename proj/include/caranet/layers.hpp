#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caranet/ops.hpp"
#include "caranet/rng.hpp"
#include "caranet/tensor.hpp"

namespace caranet {

/// Owns every trainable leaf of a model, in registration order. The order is
/// part of the checkpoint contract, so construction must be deterministic.
class ParamStore {
 public:
  explicit ParamStore(std::uint64_t seed) : rng_(seed), seed_(seed) {}

  /// Kaiming fan-in normal init: stddev = sqrt(2 / (ci * kh * kw)).
  Tensor conv_weight(const std::string& name, int co, int ci, int kh, int kw);
  /// Zero-initialised vector, used for biases.
  Tensor zeros(const std::string& name, const Shape& shape);

  struct Entry {
    std::string name;
    Tensor tensor;
  };

  const std::vector<Entry>& entries() const { return entries_; }
  std::vector<Entry>& entries() { return entries_; }
  Tensor find(const std::string& name) const;
  std::int64_t parameter_count() const;
  std::uint64_t seed() const { return seed_; }

  void zero_grad();

 private:
  Tensor insert(const std::string& name, Tensor t);

  std::vector<Entry> entries_;
  Rng rng_;
  std::uint64_t seed_;
};

/// Convolution layer: weight, bias and an optional ReLU.
struct ConvLayer {
  ConvSpec spec;
  Tensor weight;
  Tensor bias;
  bool relu_after = true;

  static ConvLayer make(ParamStore& store, const std::string& name, int in_channels,
                        int out_channels, int kernel, int dilation = 1, int stride = 1,
                        bool relu_after = true);

  Tensor operator()(const Tensor& x) const;
};

/// Dilated 1xk + kx1 pair with one shared activation at the end.
struct AsymConvLayer {
  ConvSpec spec;  // describes the 1xk stage
  Tensor weight_row;
  Tensor weight_col;
  Tensor bias;
  bool relu_after = true;

  static AsymConvLayer make(ParamStore& store, const std::string& name, int in_channels,
                            int out_channels, int kernel, int dilation = 1,
                            bool relu_after = true);

  Tensor operator()(const Tensor& x) const;
};

}  // namespace caranet
