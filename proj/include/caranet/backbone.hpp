#pragma once

#include <array>
#include <string>
#include <vector>

#include "caranet/layers.hpp"

namespace caranet {

/// Encoder geometry. Five stages halve the resolution each, so the feature
/// levels sit at strides {2, 4, 8, 16, 32} relative to the input.
struct BackboneConfig {
  int in_channels = 3;
  int base_channels = 16;
  int scale = 4;  // split count inside each residual block
  std::array<int, 5> stage_channels{};
  std::array<int, 5> stage_strides{2, 4, 8, 16, 32};

  static BackboneConfig with_base(int base_channels, int in_channels = 3);
  void validate() const;
};

struct FeaturePyramid {
  std::array<Tensor, 5> levels;  // f1 .. f5
  const Tensor& f(int i) const { return levels[static_cast<size_t>(i - 1)]; }
};

/// One multi-scale residual block. Channels split into `scale` groups; group
/// one passes through, each later group convolves the sum of its slice and
/// the previous group output, and a pointwise conv fuses the concatenation
/// back onto the input.
class Res2NetBlock {
 public:
  Res2NetBlock(ParamStore& store, const std::string& name, int channels, int scale);
  Tensor forward(const Tensor& x) const;

  int channels() const { return channels_; }
  int scale() const { return scale_; }

 private:
  int channels_;
  int scale_;
  std::vector<ConvLayer> group_convs_;  // scale - 1 of them
  ConvLayer fuse_;                      // 1x1, no activation
};

class Backbone {
 public:
  Backbone(const BackboneConfig& config, ParamStore& store);

  /// Input (N, in_channels, H, W); H and W must be divisible by 32.
  FeaturePyramid encode(const Tensor& image) const;

  const BackboneConfig& config() const { return config_; }

 private:
  BackboneConfig config_;
  std::vector<ConvLayer> downsamples_;
  std::vector<Res2NetBlock> blocks_;
};

}  // namespace caranet
