#include "caranet/backbone.hpp"

namespace caranet {

BackboneConfig BackboneConfig::with_base(int base_channels, int in_channels) {
  BackboneConfig config;
  config.in_channels = in_channels;
  config.base_channels = base_channels;
  // Width grows over the first three stages and then holds; the decoder only
  // consumes f3..f5 so late-stage width is what matters.
  config.stage_channels = {base_channels, 2 * base_channels, 4 * base_channels,
                           4 * base_channels, 4 * base_channels};
  return config;
}

void BackboneConfig::validate() const {
  if (scale < 2) throw ShapeError("backbone: scale must be >= 2");
  for (size_t i = 0; i < stage_channels.size(); ++i) {
    if (stage_channels[i] % scale != 0) {
      throw ShapeError("backbone: stage " + std::to_string(i + 1) + " channels " +
                       std::to_string(stage_channels[i]) + " not divisible by scale " +
                       std::to_string(scale));
    }
  }
  int expect = 2;
  for (size_t i = 0; i < stage_strides.size(); ++i) {
    if (stage_strides[i] != expect) {
      throw ShapeError("backbone: stage strides must be {2, 4, 8, 16, 32}");
    }
    expect *= 2;
  }
}

Res2NetBlock::Res2NetBlock(ParamStore& store, const std::string& name, int channels, int scale)
    : channels_(channels), scale_(scale) {
  if (channels % scale != 0) {
    throw ShapeError("res2net block: " + std::to_string(channels) +
                     " channels not divisible by scale " + std::to_string(scale));
  }
  int group = channels / scale;
  group_convs_.reserve(static_cast<size_t>(scale - 1));
  for (int i = 1; i < scale; ++i) {
    group_convs_.push_back(
        ConvLayer::make(store, name + ".g" + std::to_string(i), group, group, 3));
  }
  fuse_ = ConvLayer::make(store, name + ".fuse", channels, channels, 1, 1, 1,
                          /*relu_after=*/false);
}

Tensor Res2NetBlock::forward(const Tensor& x) const {
  if (x.channels() != channels_) {
    throw ShapeError("res2net block: expected " + std::to_string(channels_) +
                     " channels, got " + std::to_string(x.channels()));
  }
  int group = channels_ / scale_;
  std::vector<Tensor> outs;
  outs.reserve(static_cast<size_t>(scale_));
  Tensor prev = slice_channels(x, 0, group);
  outs.push_back(prev);
  for (int i = 1; i < scale_; ++i) {
    Tensor slice = slice_channels(x, i * group, (i + 1) * group);
    prev = group_convs_[static_cast<size_t>(i - 1)](add(slice, prev));
    outs.push_back(prev);
  }
  return add(x, fuse_(concat_channels(outs)));
}

Backbone::Backbone(const BackboneConfig& config, ParamStore& store) : config_(config) {
  config_.validate();
  int prev_channels = config_.in_channels;
  for (int stage = 0; stage < 5; ++stage) {
    int channels = config_.stage_channels[static_cast<size_t>(stage)];
    downsamples_.push_back(ConvLayer::make(store, "backbone.s" + std::to_string(stage + 1) + ".down",
                                           prev_channels, channels, 3, 1, /*stride=*/2));
    blocks_.emplace_back(store, "backbone.s" + std::to_string(stage + 1) + ".block", channels,
                         config_.scale);
    prev_channels = channels;
  }
}

FeaturePyramid Backbone::encode(const Tensor& image) const {
  if (image.ndim() != 4 || image.channels() != config_.in_channels) {
    throw ShapeError("backbone: expected (N, " + std::to_string(config_.in_channels) +
                     ", H, W) input, got " + shape_string(image.shape()));
  }
  int largest = config_.stage_strides.back();
  if (image.height() % largest != 0 || image.width() % largest != 0) {
    throw ShapeError("backbone: input " + std::to_string(image.height()) + "x" +
                     std::to_string(image.width()) + " not divisible by stride " +
                     std::to_string(largest));
  }
  FeaturePyramid out;
  Tensor x = image;
  for (int stage = 0; stage < 5; ++stage) {
    x = downsamples_[static_cast<size_t>(stage)](x);
    x = blocks_[static_cast<size_t>(stage)].forward(x);
    out.levels[static_cast<size_t>(stage)] = x;
  }
  return out;
}

}  // namespace caranet
