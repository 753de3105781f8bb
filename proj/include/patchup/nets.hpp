#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "patchup/layers.hpp"
#include "patchup/mask.hpp"
#include "patchup/mix.hpp"
#include "patchup/objective.hpp"

namespace patchup {

/// PatchUp hyperparameters (defaults: Hard PatchUp tuning).
struct PatchUpConfig {
  double gamma = 0.5;
  int block_size = 7;
  double patchup_prob = 0.7;
  double alpha = 2.0;
  PatchUpMode op_mode = PatchUpMode::kHard;
  bool per_sample_mask = false;
  LossTerms loss_terms = LossTerms::kBoth;
};

/// Per-step regularizer selection plus every baseline's knobs.
struct TrainStepConfig {
  MixMode mode = MixMode::kNone;
  PatchUpConfig patchup;
  double fire_prob = 1.0;  // probability the mixing op fires for a mini-batch
  double mixup_alpha = 1.0;
  double manifold_alpha = 1.5;
  double cutmix_alpha = 1.0;
  int cutout_size = 16;
  double dropblock_gamma = 0.9;
  int dropblock_block = 7;

  void validate() const;
};

/// Stack of convolutional stages g_1..g_n plus a classifier head f. An
/// interception point k means "after stage k"; k = 0 is the input space.
class LayeredClassifier {
public:
  std::vector<std::vector<std::unique_ptr<Layer>>> stages;
  std::vector<std::unique_ptr<Layer>> head;
  std::vector<int> eligible_set;  // S

  std::size_t num_stages() const { return stages.size(); }

  Tensor forward(const Tensor& x, bool train);
  /// Run stages 1..upto (inclusive); upto = 0 returns x unchanged.
  Tensor forward_stages(const Tensor& x, std::size_t upto, bool train);
  /// Continue from the output of stage `from` through the head.
  Tensor forward_from(const Tensor& h, std::size_t from, bool train);
  /// Head and stages n..k+1 in reverse; returns the gradient at stage k's output.
  Tensor backward_to_stage(const Tensor& dlogits, std::size_t k);
  /// Stages k..1 in reverse; returns the gradient w.r.t. the input.
  Tensor backward_stages(const Tensor& dh, std::size_t k);
  /// Full backward; returns the gradient w.r.t. the input.
  Tensor backward(const Tensor& dlogits);

  std::vector<ParamTensor*> params();
  std::vector<std::pair<std::string, Tensor*>> named_state();
  void zero_grad();
  std::size_t param_count();
};

/// 3-stage CNN (conv + batchnorm + ReLU + 2x2 maxpool per stage), S = {0,1,2}:
/// the last stage is excluded from interception. Parameter count stays under
/// 200k for 32x32 inputs.
LayeredClassifier build_toy_cnn(std::size_t in_channels, std::size_t classes, Rng& rng,
                                std::size_t base_width = 16);

/// What one regularized forward produced, in the detail the backward pass and
/// the learning objective need.
struct RegularizedForward {
  Tensor logits;
  MixedBatchRecord record;
  std::vector<BinaryMask> masks;  // one, or batch-size many with per-sample flag
};

/// With probability fire_prob, draws k from S, applies the configured mixing
/// op at k, and finishes the forward pass. Otherwise a plain forward.
RegularizedForward forward_with_regularizer(LayeredClassifier& model, const Tensor& x,
                                            const TrainStepConfig& cfg, Rng& rng,
                                            bool train = true);

/// Backward companion: propagates dlogits through the head, the mixing op at
/// record.layer_index, and the remaining stages. Returns gradient w.r.t. x.
Tensor backward_with_regularizer(LayeredClassifier& model, const Tensor& dlogits,
                                 const RegularizedForward& fwd);

}  // namespace patchup
