#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "patchup/mask.hpp"
#include "patchup/rng.hpp"
#include "patchup/tensor.hpp"

namespace patchup {

enum class MixMode {
  kNone,
  kHard,
  kSoft,
  kInputHard,
  kMixup,
  kManifoldMixup,
  kCutMix,
  kCutout,
  kDropBlock,
};

std::string to_string(MixMode mode);
MixMode mix_mode_from_string(const std::string& name);

/// Everything the learning objective needs about one mixed mini-batch.
struct MixedBatchRecord {
  MixMode mode = MixMode::kNone;
  std::vector<std::size_t> partner_index;  // the j pairing, a permutation
  double lambda = 1.0;
  double p_u = 1.0;          // fraction of unchanged features
  int layer_index = -1;      // k; 0 = input space, -1 = no interception
};

/// lambda*a + (1-lambda)*b elementwise.
Tensor mix_lambda(const Tensor& a, const Tensor& b, double lambda);

/// M (.) h_i + (1-M) (.) h_j, mask broadcast over batch and channels.
Tensor hard_patchup(const Tensor& h_i, const Tensor& h_j, const BinaryMask& mask);

/// h_i outside blocks; lambda*h_i + (1-lambda)*h_j inside blocks.
Tensor soft_patchup(const Tensor& h_i, const Tensor& h_j, const BinaryMask& mask,
                    double lambda);

/// One uniformly placed rectangle of area ratio (1-lambda) copied from x_j
/// into x_i. Returns the realized unchanged-pixel fraction as .second.
std::pair<Tensor, double> input_hard_patchup(const Tensor& x_i, const Tensor& x_j,
                                             Rng& rng, double lambda);

Tensor mixup_op(const Tensor& x_i, const Tensor& x_j, double lambda);
Tensor manifold_mixup_op(const Tensor& h_i, const Tensor& h_j, double lambda);

/// CutMix shares the rectangle mechanics with input_hard_patchup; the label
/// weight is the unchanged-area fraction.
std::pair<Tensor, double> cutmix_op(const Tensor& x_i, const Tensor& x_j, Rng& rng,
                                    double lambda);

/// Zero one cut_size x cut_size square (clipped at borders) per image at a
/// uniform center. Labels unchanged.
Tensor cutout_op(const Tensor& x, Rng& rng, int cut_size);

/// Mask then rescale by count(M)/sum(M) to preserve expected activation norm.
Tensor dropblock_op(const Tensor& h, const MaskParams& params, Rng& rng);

/// The masking half of dropblock_op, for callers that manage the mask.
Tensor dropblock_apply(const Tensor& h, const BinaryMask& mask);

/// Permute batch index 0 of a rank-4 tensor.
Tensor permute_batch(const Tensor& t, const std::vector<std::size_t>& perm);

/// Uniformly random permutation of {0..n-1}; identity fixed points allowed.
std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng);

}  // namespace patchup
