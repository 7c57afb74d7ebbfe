#pragma once

#include <string>
#include <vector>

#include "caranet/layers.hpp"

namespace caranet {

enum class CfpVariant { regular, asymmetric };

/// Channel-wise feature pyramid: K parallel dilated branches over a 1x1
/// split of the input, fused hierarchically and concatenated back to the
/// input width with a residual connection.
struct CfpConfig {
  int branches = 4;
  std::vector<int> dilation_rates{1, 2, 4, 8};
  CfpVariant variant = CfpVariant::regular;

  void validate(int channels) const;
};

/// Progressive fusion levels: level_1 = outs[0], level_i = level_{i-1} + outs[i-1].
std::vector<Tensor> hff_levels(const std::vector<Tensor>& outs);
/// The levels concatenated along channels, in branch order.
Tensor hff_fuse(const std::vector<Tensor>& outs);

/// One dilated sub-pyramid: three conv blocks at a fixed rate whose outputs
/// are concatenated, widths B/4 + B/4 + B/2 for branch width B.
class FpChannel {
 public:
  FpChannel(ParamStore& store, const std::string& name, int channels, int rate,
            CfpVariant variant);
  Tensor forward(const Tensor& x) const;

  int rate() const { return rate_; }

 private:
  int channels_;
  int rate_;
  CfpVariant variant_;
  std::vector<ConvLayer> regular_;
  std::vector<AsymConvLayer> asymmetric_;
};

class CfpModule {
 public:
  CfpModule(ParamStore& store, const std::string& name, int channels, const CfpConfig& config);
  Tensor forward(const Tensor& x) const;

  int channels() const { return channels_; }
  const CfpConfig& config() const { return config_; }

 private:
  int channels_;
  CfpConfig config_;
  std::vector<ConvLayer> reducers_;   // 1x1 to M/K per branch
  std::vector<FpChannel> channels_fp_;
};

}  // namespace caranet
