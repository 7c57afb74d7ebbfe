#pragma once

#include <string>

#include "caranet/layers.hpp"

namespace caranet {

/// Factorised 2-d attention: a height pass followed by a width pass, each
/// with its own pointwise q/k/v projections and a sigmoid gate scaled by
/// 1/sqrt(C).
class AxialAttention {
 public:
  AxialAttention(ParamStore& store, const std::string& name, int channels);
  Tensor forward(const Tensor& x) const;

  int channels() const { return channels_; }

 private:
  Tensor pass(const Tensor& x, Axis1d axis, const Tensor& wq, const Tensor& wk,
              const Tensor& wv) const;

  int channels_;
  Tensor q_h_, k_h_, v_h_;  // height pass projections
  Tensor q_w_, k_w_, v_w_;  // width pass projections
};

/// 1 - sigmoid(s), evaluated as sigmoid(-s) so the value stays strictly
/// inside (0, 1) for logits out to +-700.
Tensor reverse_gate(const Tensor& side_logits);

/// Per-channel product of the attention features with a one-channel gate.
Tensor ara_combine(const Tensor& attention_features, const Tensor& gate);

/// One decoder stage: attention on the pyramid features, gated by the
/// reversed incoming side map, reduced to one channel and added back onto
/// the incoming map.
class AraStage {
 public:
  AraStage(ParamStore& store, const std::string& name, int channels, int reduce_channels = 32);
  Tensor forward(const Tensor& features, const Tensor& incoming_side_map) const;

  const AxialAttention& attention() const { return attention_; }

 private:
  AxialAttention attention_;
  ConvLayer reduce1_;
  ConvLayer reduce2_;  // to one channel, linear
};

}  // namespace caranet
