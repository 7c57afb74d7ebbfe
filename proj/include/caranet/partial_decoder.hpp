#pragma once

#include <string>

#include "caranet/layers.hpp"

namespace caranet {

/// Aggregates the three high-level encoder features into one coarse logit
/// map at f3 resolution. Each input is first reduced to a common width, the
/// coarser branches are upsampled and multiplied into the finer ones, and
/// the concatenated branches collapse to a single channel.
class PartialDecoder {
 public:
  PartialDecoder(ParamStore& store, const std::string& name, int c3, int c4, int c5,
                 int width = 32);

  /// f3, f4, f5 at consecutive power-of-two strides. Returns (N, 1, H3, W3)
  /// raw logits.
  Tensor decode(const Tensor& f3, const Tensor& f4, const Tensor& f5) const;

  int width() const { return width_; }

 private:
  int width_;
  ConvLayer reduce3_, reduce4_, reduce5_;
  ConvLayer fuse1_, fuse2_;  // 3x3 on the concatenated branches
  ConvLayer head_;           // 1x1 to one channel, linear
};

}  // namespace caranet
