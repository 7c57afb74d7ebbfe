#pragma once

#include <vector>

#include "caranet/tensor.hpp"

namespace caranet {

/// 2-d convolution geometry. Padding is split per axis so that "same"
/// convolutions preserve spatial dims for non-square kernels too.
struct ConvSpec {
  int kernel_h = 1;
  int kernel_w = 1;
  int dilation = 1;
  int stride = 1;
  int pad_h = 0;
  int pad_w = 0;
  int in_channels = 1;
  int out_channels = 1;

  // Effective kernel extent along an axis: (kernel - 1) * dilation + 1.
  int extent_h() const { return (kernel_h - 1) * dilation + 1; }
  int extent_w() const { return (kernel_w - 1) * dilation + 1; }

  // Padding that preserves spatial dims at stride 1 (odd kernel extents).
  static ConvSpec same(int kernel_h, int kernel_w, int in_channels, int out_channels,
                       int dilation = 1, int stride = 1);
};

enum class ElemOp { add, mul };
enum class Axis1d { height, width };

// ---- elementwise and affine ----
Tensor add(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor elementwise(const Tensor& a, const Tensor& b, ElemOp op);
/// scale * x + shift, pointwise.
Tensor affine(const Tensor& x, double scale, double shift);

// ---- activations ----
Tensor relu(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softmax(const Tensor& x, int axis);

// ---- reductions ----
Tensor sum(const Tensor& x);

// ---- linear algebra ----
Tensor matmul(const Tensor& a, const Tensor& b);

// ---- convolution ----
Tensor conv2d(const Tensor& input, const Tensor& weights, const ConvSpec& spec);
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec);
/// 1xk convolution followed by kx1; equals a full conv with the separable
/// product kernel. spec describes the 1xk stage (kernel_w = k).
Tensor asymmetric_conv(const Tensor& input, const Tensor& weights_1k, const Tensor& weights_k1,
                       const ConvSpec& spec);

// ---- geometry ----
/// Half-pixel bilinear interpolation (align_corners = false), edge clamped.
Tensor bilinear_resize(const Tensor& input, int target_h, int target_w);
Tensor avg_pool(const Tensor& input, int window, int stride, int padding);
Tensor max_pool(const Tensor& input, int window, int stride, int padding);

// ---- channel plumbing ----
/// x[n, c, :, :] + bias[c].
Tensor add_channel_bias(const Tensor& x, const Tensor& bias);
Tensor concat_channels(const std::vector<Tensor>& parts);
Tensor slice_channels(const Tensor& x, int begin, int end);
Tensor repeat_channels(const Tensor& x, int times);

// ---- attention ----
/// Sigmoid-gated 1-d attention along one spatial axis. Every line (column for
/// Axis1d::height, row for Axis1d::width) attends over its own positions:
/// gate = sigmoid(q . k / sqrt(C)), out = gate * v. q, k, v share x's shape.
Tensor attention_1d(const Tensor& q, const Tensor& k, const Tensor& v, Axis1d axis);

}  // namespace caranet
