#pragma once

#include <cstdint>

#include "caranet/ara.hpp"
#include "caranet/backbone.hpp"
#include "caranet/cfp.hpp"
#include "caranet/partial_decoder.hpp"

namespace caranet {

struct ModelConfig {
  BackboneConfig backbone = BackboneConfig::with_base(16);
  int decoder_width = 32;
  CfpConfig cfp;
  int ara_reduce_channels = 32;
  std::uint64_t seed = 1;

  /// Small configuration for gradient checks and fast tests.
  static ModelConfig tiny(std::uint64_t seed = 1, int in_channels = 3);
};

struct ModelOutputs {
  Tensor global_map;  // logits at f3 resolution
  Tensor s5, s4, s3;  // side logits, deepest first
  Tensor prediction;  // sigmoid probabilities at input resolution
};

/// Full segmentation network: encoder, partial decoder for the coarse global
/// map, one feature-pyramid module per high-level feature, and a chain of
/// gated attention stages that refine the side maps from deep to shallow.
class CaraNet {
 public:
  explicit CaraNet(const ModelConfig& config);

  ModelOutputs forward(const Tensor& image) const;

  /// Refinement chain alone. `global_map` must sit at f3 resolution; the
  /// prediction is produced at (out_h, out_w).
  ModelOutputs decode_chain(const Tensor& f3p, const Tensor& f4p, const Tensor& f5p,
                            const Tensor& global_map, int out_h, int out_w) const;

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return store_; }
  const ParamStore& params() const { return store_; }

 private:
  ModelConfig config_;
  ParamStore store_;
  Backbone backbone_;
  PartialDecoder partial_decoder_;
  CfpModule cfp3_, cfp4_, cfp5_;
  AraStage stage5_, stage4_, stage3_;
};

}  // namespace caranet
