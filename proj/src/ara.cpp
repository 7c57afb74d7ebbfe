#include "caranet/ara.hpp"

namespace caranet {

AxialAttention::AxialAttention(ParamStore& store, const std::string& name, int channels)
    : channels_(channels),
      q_h_(store.conv_weight(name + ".h.q", channels, channels, 1, 1)),
      k_h_(store.conv_weight(name + ".h.k", channels, channels, 1, 1)),
      v_h_(store.conv_weight(name + ".h.v", channels, channels, 1, 1)),
      q_w_(store.conv_weight(name + ".w.q", channels, channels, 1, 1)),
      k_w_(store.conv_weight(name + ".w.k", channels, channels, 1, 1)),
      v_w_(store.conv_weight(name + ".w.v", channels, channels, 1, 1)) {}

Tensor AxialAttention::pass(const Tensor& x, Axis1d axis, const Tensor& wq, const Tensor& wk,
                            const Tensor& wv) const {
  ConvSpec proj = ConvSpec::same(1, 1, channels_, channels_);
  Tensor q = conv2d(x, wq, proj);
  Tensor k = conv2d(x, wk, proj);
  Tensor v = conv2d(x, wv, proj);
  return attention_1d(q, k, v, axis);
}

Tensor AxialAttention::forward(const Tensor& x) const {
  if (x.channels() != channels_) {
    throw ShapeError("axial attention: expected " + std::to_string(channels_) +
                     " channels, got " + std::to_string(x.channels()));
  }
  Tensor tall = pass(x, Axis1d::height, q_h_, k_h_, v_h_);
  return pass(tall, Axis1d::width, q_w_, k_w_, v_w_);
}

Tensor reverse_gate(const Tensor& side_logits) {
  if (side_logits.ndim() != 4 || side_logits.channels() != 1) {
    throw ShapeError("reverse_gate: need a one-channel map, got " +
                     shape_string(side_logits.shape()));
  }
  return sigmoid(affine(side_logits, -1.0, 0.0));
}

Tensor ara_combine(const Tensor& attention_features, const Tensor& gate) {
  if (gate.ndim() != 4 || gate.channels() != 1) {
    throw ShapeError("ara_combine: gate must be one channel, got " + shape_string(gate.shape()));
  }
  if (attention_features.height() != gate.height() ||
      attention_features.width() != gate.width()) {
    throw ShapeError("ara_combine: spatial mismatch " +
                     shape_string(attention_features.shape()) + " vs " +
                     shape_string(gate.shape()));
  }
  return mul(attention_features, repeat_channels(gate, attention_features.channels()));
}

AraStage::AraStage(ParamStore& store, const std::string& name, int channels, int reduce_channels)
    : attention_(store, name + ".aa", channels),
      reduce1_(ConvLayer::make(store, name + ".red1", channels, reduce_channels, 3)),
      reduce2_(ConvLayer::make(store, name + ".red2", reduce_channels, 1, 3, 1, 1,
                               /*relu_after=*/false)) {}

Tensor AraStage::forward(const Tensor& features, const Tensor& incoming_side_map) const {
  if (incoming_side_map.height() != features.height() ||
      incoming_side_map.width() != features.width()) {
    throw ShapeError("ara stage: side map " + shape_string(incoming_side_map.shape()) +
                     " not at feature resolution " + shape_string(features.shape()));
  }
  Tensor aa = attention_.forward(features);
  Tensor gated = ara_combine(aa, reverse_gate(incoming_side_map));
  Tensor branch = reduce2_(reduce1_(gated));
  return add(branch, incoming_side_map);
}

}  // namespace caranet
