#include "caranet/model.hpp"

namespace caranet {

ModelConfig ModelConfig::tiny(std::uint64_t seed, int in_channels) {
  ModelConfig config;
  config.backbone = BackboneConfig::with_base(8, in_channels);
  config.decoder_width = 8;
  config.ara_reduce_channels = 8;
  config.seed = seed;
  return config;
}

CaraNet::CaraNet(const ModelConfig& config)
    : config_(config),
      store_(config.seed),
      backbone_(config.backbone, store_),
      partial_decoder_(store_, "pd", config.backbone.stage_channels[2],
                       config.backbone.stage_channels[3], config.backbone.stage_channels[4],
                       config.decoder_width),
      cfp3_(store_, "cfp3", config.backbone.stage_channels[2], config.cfp),
      cfp4_(store_, "cfp4", config.backbone.stage_channels[3], config.cfp),
      cfp5_(store_, "cfp5", config.backbone.stage_channels[4], config.cfp),
      stage5_(store_, "ara5", config.backbone.stage_channels[4], config.ara_reduce_channels),
      stage4_(store_, "ara4", config.backbone.stage_channels[3], config.ara_reduce_channels),
      stage3_(store_, "ara3", config.backbone.stage_channels[2], config.ara_reduce_channels) {}

ModelOutputs CaraNet::decode_chain(const Tensor& f3p, const Tensor& f4p, const Tensor& f5p,
                                   const Tensor& global_map, int out_h, int out_w) const {
  if (global_map.height() != f3p.height() || global_map.width() != f3p.width()) {
    throw ShapeError("decode chain: global map " + shape_string(global_map.shape()) +
                     " not at f3 resolution " + shape_string(f3p.shape()));
  }
  ModelOutputs out;
  out.global_map = global_map;

  Tensor in5 = bilinear_resize(global_map, f5p.height(), f5p.width());
  out.s5 = stage5_.forward(f5p, in5);

  Tensor in4 = bilinear_resize(out.s5, f4p.height(), f4p.width());
  out.s4 = stage4_.forward(f4p, in4);

  Tensor in3 = bilinear_resize(out.s4, f3p.height(), f3p.width());
  out.s3 = stage3_.forward(f3p, in3);

  out.prediction = sigmoid(bilinear_resize(out.s3, out_h, out_w));
  return out;
}

ModelOutputs CaraNet::forward(const Tensor& image) const {
  FeaturePyramid pyramid = backbone_.encode(image);
  Tensor global_map = partial_decoder_.decode(pyramid.f(3), pyramid.f(4), pyramid.f(5));
  Tensor f3p = cfp3_.forward(pyramid.f(3));
  Tensor f4p = cfp4_.forward(pyramid.f(4));
  Tensor f5p = cfp5_.forward(pyramid.f(5));
  return decode_chain(f3p, f4p, f5p, global_map, image.height(), image.width());
}

}  // namespace caranet
