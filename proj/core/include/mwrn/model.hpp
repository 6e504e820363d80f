#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "mwrn/ops.hpp"
#include "mwrn/params.hpp"
#include "mwrn/tensor.hpp"
#include "mwrn/wavelet.hpp"

namespace mwrn {

// Batch-norm conventions used throughout the network.
inline constexpr double kBnEpsilon = 1e-4;
inline constexpr double kBnMomentum = 0.9;

struct MwrnConfig {
  int in_channels = 1;  // 1 (grayscale) or 3 (color)
  // Feature widths at scales 1/2, 1/4 and 1/8.
  std::array<int, 3> widths = {160, 256, 512};
  // Residual blocks per encoder side and per decoder side at each scale;
  // the innermost scale gets 2*rb_per_side as one chain.
  int rb_per_side = 4;
  bool use_scale_input = true;  // feed each scale the noisy subbands (SI)
  bool use_scale_loss = true;   // intermediate subband losses (SL)
  double lambda = 1.0;          // tradeoff between image and subband losses
  bool global_residual = true;  // final output predicts image minus input

  static MwrnConfig desk(int in_channels = 1);
  static MwrnConfig paper(int in_channels = 1);
  void validate() const;
};

// One progressive-training stage of the network. Stage 1 is the innermost
// scale alone, stage 2 adds the middle scale, stage 3 is the full model.
// Parameter names are stable across stages so lower-stage weights carry
// over by name.
template <typename T>
class StageNetwork {
 public:
  struct ConvInfo {
    std::string name;
    int in_c = 0;
    int out_c = 0;
    bool has_bn = false;
    bool main_path = true;  // on the path to the stage's primary output
  };

  int stage = 0;
  MwrnConfig config;
  ParamStore<T> params;
  bool bn_folded = false;
  std::vector<ConvInfo> conv_layers;
  std::vector<std::string> residual_blocks;  // prefixes, for accounting

  StageNetwork() = default;
  StageNetwork(const StageNetwork&) = delete;
  StageNetwork& operator=(const StageNetwork&) = delete;
  StageNetwork(StageNetwork&&) = default;
  StageNetwork& operator=(StageNetwork&&) = default;

  // Convolution layers on the primary output path (the depth figure usually
  // quoted for this family of networks; auxiliary subband heads excluded).
  int conv_layer_count() const;
  int total_conv_count() const;
  int residual_block_count() const { return int(residual_blocks.size()); }
};

template <typename T>
struct StageOutputs {
  Tensor<T> image;      // stage 3 only
  Tensor<T> subbands2;  // predicted level-2 packet, stages >= 2
  Tensor<T> subbands3;  // predicted level-3 packet, all stages
};

template <typename T>
StageNetwork<T> build_stage(int stage, const MwrnConfig& config,
                            std::uint64_t seed);

// conv -> BN -> ReLU -> conv -> BN, plus identity, then ReLU.
template <typename T>
Tensor<T> residual_block(StageNetwork<T>& net, const std::string& prefix,
                         const Tensor<T>& input, bool training);

template <typename T>
StageOutputs<T> forward(StageNetwork<T>& net, const Tensor<T>& image,
                        bool training);

// Copy every shared-name parameter (values, BN running stats) from `lower`
// into `upper`, resetting the optimizer moments; the encoder bridge that
// feeds the pre-trained scale is zero-initialized so the carried stage
// reproduces the lower stage's outputs exactly until training moves it.
template <typename T>
void carry_over(const StageNetwork<T>& lower, StageNetwork<T>& upper);

// Absorb every BN layer into its preceding convolution (weights scaled by
// gamma/sqrt(var+eps), bias shifted accordingly) using the running
// statistics; eval-mode outputs are unchanged. Optimizer moments of the
// rewritten convolutions restart from zero.
template <typename T>
void fold_batchnorm(StageNetwork<T>& net);

}  // namespace mwrn
