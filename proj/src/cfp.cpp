#include "caranet/cfp.hpp"

namespace caranet {

void CfpConfig::validate(int channels) const {
  if (branches < 1) throw ShapeError("cfp: need at least one branch");
  if (static_cast<int>(dilation_rates.size()) != branches) {
    throw ShapeError("cfp: " + std::to_string(dilation_rates.size()) + " rates for " +
                     std::to_string(branches) + " branches");
  }
  for (int r : dilation_rates) {
    if (r < 1) throw ShapeError("cfp: dilation rates must be positive");
  }
  if (channels % branches != 0) {
    throw ShapeError("cfp: " + std::to_string(channels) + " channels not divisible by K = " +
                     std::to_string(branches));
  }
  int branch_width = channels / branches;
  if (branch_width % 4 != 0) {
    throw ShapeError("cfp: branch width " + std::to_string(branch_width) +
                     " must be divisible by 4 for the block split");
  }
}

std::vector<Tensor> hff_levels(const std::vector<Tensor>& outs) {
  if (outs.empty()) throw ShapeError("hff: no branch outputs");
  for (size_t i = 1; i < outs.size(); ++i) {
    if (outs[i].shape() != outs[0].shape()) {
      throw ShapeError("hff: branch " + std::to_string(i) + " shape " +
                       shape_string(outs[i].shape()) + " differs from " +
                       shape_string(outs[0].shape()));
    }
  }
  std::vector<Tensor> levels;
  levels.reserve(outs.size());
  levels.push_back(outs[0]);
  for (size_t i = 1; i < outs.size(); ++i) levels.push_back(add(levels.back(), outs[i]));
  return levels;
}

Tensor hff_fuse(const std::vector<Tensor>& outs) { return concat_channels(hff_levels(outs)); }

FpChannel::FpChannel(ParamStore& store, const std::string& name, int channels, int rate,
                     CfpVariant variant)
    : channels_(channels), rate_(rate), variant_(variant) {
  if (rate < 1) throw ShapeError("fp channel: dilation rate must be positive");
  int quarter = channels / 4;
  int half = channels - 2 * quarter;
  std::array<std::pair<int, int>, 3> widths{{{channels, quarter}, {quarter, quarter}, {quarter, half}}};
  for (int i = 0; i < 3; ++i) {
    std::string block = name + ".b" + std::to_string(i + 1);
    auto [ci, co] = widths[static_cast<size_t>(i)];
    if (variant == CfpVariant::regular) {
      regular_.push_back(ConvLayer::make(store, block, ci, co, 3, rate));
    } else {
      asymmetric_.push_back(AsymConvLayer::make(store, block, ci, co, 3, rate));
    }
  }
}

Tensor FpChannel::forward(const Tensor& x) const {
  if (x.channels() != channels_) {
    throw ShapeError("fp channel: expected " + std::to_string(channels_) + " channels, got " +
                     std::to_string(x.channels()));
  }
  auto block = [&](int i, const Tensor& in) {
    return variant_ == CfpVariant::regular ? regular_[static_cast<size_t>(i)](in)
                                           : asymmetric_[static_cast<size_t>(i)](in);
  };
  Tensor o1 = block(0, x);
  Tensor o2 = block(1, o1);
  Tensor o3 = block(2, o2);
  return concat_channels({o1, o2, o3});
}

CfpModule::CfpModule(ParamStore& store, const std::string& name, int channels,
                     const CfpConfig& config)
    : channels_(channels), config_(config) {
  config_.validate(channels);
  int branch_width = channels / config_.branches;
  for (int k = 0; k < config_.branches; ++k) {
    std::string branch = name + ".k" + std::to_string(k + 1);
    reducers_.push_back(ConvLayer::make(store, branch + ".reduce", channels, branch_width, 1));
    channels_fp_.emplace_back(store, branch, branch_width,
                              config_.dilation_rates[static_cast<size_t>(k)], config_.variant);
  }
}

Tensor CfpModule::forward(const Tensor& x) const {
  if (x.channels() != channels_) {
    throw ShapeError("cfp: expected " + std::to_string(channels_) + " channels, got " +
                     std::to_string(x.channels()));
  }
  std::vector<Tensor> outs;
  outs.reserve(static_cast<size_t>(config_.branches));
  for (int k = 0; k < config_.branches; ++k) {
    Tensor reduced = reducers_[static_cast<size_t>(k)](x);
    outs.push_back(channels_fp_[static_cast<size_t>(k)].forward(reduced));
  }
  return add(x, hff_fuse(outs));
}

}  // namespace caranet
