#pragma once

#include <vector>

#include "patchup/mix.hpp"
#include "patchup/tensor.hpp"

namespace patchup {

/// Probability vector over classes; entries nonnegative, sum 1 within 1e-6.
struct SoftTarget {
  std::vector<double> probs;

  static SoftTarget one_hot(std::size_t cls, std::size_t num_classes);
  void validate() const;
};

enum class LossTerms { kBoth, kL1Only, kL2Only };

LossTerms loss_terms_from_string(const std::string& name);

struct LossBreakdown {
  double l1 = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  LossTerms enabled = LossTerms::kBoth;
};

/// Mix_{p_u}(y_i, y_j).
SoftTarget reweight_target_hard(const SoftTarget& y_i, const SoftTarget& y_j, double p_u);

/// Mix_{p_u}(y_i, Mix_lambda(y_i, y_j)).
SoftTarget reweight_target_soft(const SoftTarget& y_i, const SoftTarget& y_j, double p_u,
                                double lambda);

/// Soft-target cross entropy, batch-mean: mean_i of -sum_c t_ic log softmax(z_i)_c.
/// logits is rank-2 (batch, classes).
double cross_entropy(const Tensor& logits, const std::vector<SoftTarget>& targets);

/// Gradient of batch-mean cross entropy w.r.t. logits: (softmax - target)/B.
Tensor cross_entropy_grad(const Tensor& logits, const std::vector<SoftTarget>& targets);

enum class PatchUpMode { kHard, kSoft };

/// Two-term PatchUp loss. L1 mixes loss values with weight p_u; L2 is the
/// cross entropy against the re-weighted target. Total sums the enabled terms.
LossBreakdown patchup_loss(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                           const std::vector<SoftTarget>& y_j, double p_u, double lambda,
                           PatchUpMode mode, LossTerms enabled = LossTerms::kBoth);

/// Gradient of patchup_loss total w.r.t. logits.
Tensor patchup_loss_grad(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                         const std::vector<SoftTarget>& y_j, double p_u, double lambda,
                         PatchUpMode mode, LossTerms enabled = LossTerms::kBoth);

/// Mixup/ManifoldMixup loss: CE against Mix_lambda(y_i, y_j).
double mixup_loss(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                  const std::vector<SoftTarget>& y_j, double lambda);
Tensor mixup_loss_grad(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                       const std::vector<SoftTarget>& y_j, double lambda);

/// CutMix loss: Mix_{p_u}[CE(f, y_i), CE(f, y_j)].
double cutmix_loss(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                   const std::vector<SoftTarget>& y_j, double p_u);
Tensor cutmix_loss_grad(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                        const std::vector<SoftTarget>& y_j, double p_u);

}  // namespace patchup
