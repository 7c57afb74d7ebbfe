#include "caranet/layers.hpp"

#include <cmath>
#include <stdexcept>

namespace caranet {

Tensor ParamStore::insert(const std::string& name, Tensor t) {
  for (const Entry& e : entries_) {
    if (e.name == name) throw std::logic_error("duplicate parameter name: " + name);
  }
  entries_.push_back({name, t});
  return t;
}

Tensor ParamStore::conv_weight(const std::string& name, int co, int ci, int kh, int kw) {
  double fan_in = static_cast<double>(ci) * kh * kw;
  double stddev = std::sqrt(2.0 / fan_in);
  return insert(name, rng_.normal_tensor({co, ci, kh, kw}, 0.0, stddev, /*requires_grad=*/true));
}

Tensor ParamStore::zeros(const std::string& name, const Shape& shape) {
  return insert(name, Tensor::zeros(shape, /*requires_grad=*/true));
}

Tensor ParamStore::find(const std::string& name) const {
  for (const Entry& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw std::out_of_range("no parameter named " + name);
}

std::int64_t ParamStore::parameter_count() const {
  std::int64_t total = 0;
  for (const Entry& e : entries_) total += e.tensor.size();
  return total;
}

void ParamStore::zero_grad() {
  for (Entry& e : entries_) e.tensor.zero_grad();
}

ConvLayer ConvLayer::make(ParamStore& store, const std::string& name, int in_channels,
                          int out_channels, int kernel, int dilation, int stride,
                          bool relu_after) {
  ConvLayer layer;
  layer.spec = ConvSpec::same(kernel, kernel, in_channels, out_channels, dilation, stride);
  layer.weight = store.conv_weight(name + ".w", out_channels, in_channels, kernel, kernel);
  layer.bias = store.zeros(name + ".b", {out_channels});
  layer.relu_after = relu_after;
  return layer;
}

Tensor ConvLayer::operator()(const Tensor& x) const {
  Tensor y = conv2d(x, weight, bias, spec);
  return relu_after ? relu(y) : y;
}

AsymConvLayer AsymConvLayer::make(ParamStore& store, const std::string& name, int in_channels,
                                  int out_channels, int kernel, int dilation, bool relu_after) {
  AsymConvLayer layer;
  layer.spec = ConvSpec::same(1, kernel, in_channels, out_channels, dilation);
  layer.weight_row = store.conv_weight(name + ".wr", out_channels, in_channels, 1, kernel);
  layer.weight_col = store.conv_weight(name + ".wc", out_channels, out_channels, kernel, 1);
  layer.bias = store.zeros(name + ".b", {out_channels});
  layer.relu_after = relu_after;
  return layer;
}

Tensor AsymConvLayer::operator()(const Tensor& x) const {
  Tensor y = add_channel_bias(asymmetric_conv(x, weight_row, weight_col, spec), bias);
  return relu_after ? relu(y) : y;
}

}  // namespace caranet
