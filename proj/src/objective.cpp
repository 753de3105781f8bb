#include "patchup/objective.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace patchup {

SoftTarget SoftTarget::one_hot(std::size_t cls, std::size_t num_classes) {
  if (cls >= num_classes)
    throw std::invalid_argument("SoftTarget::one_hot: class index out of range");
  SoftTarget t;
  t.probs.assign(num_classes, 0.0);
  t.probs[cls] = 1.0;
  return t;
}

void SoftTarget::validate() const {
  double sum = 0.0;
  for (double p : probs) {
    if (p < 0.0) throw std::invalid_argument("SoftTarget: negative probability");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("SoftTarget: probabilities sum to " + std::to_string(sum));
}

LossTerms loss_terms_from_string(const std::string& name) {
  if (name == "both") return LossTerms::kBoth;
  if (name == "l1") return LossTerms::kL1Only;
  if (name == "l2") return LossTerms::kL2Only;
  throw std::invalid_argument("unknown loss_terms setting: " + name);
}

static SoftTarget mix_targets(const SoftTarget& a, const SoftTarget& b, double w) {
  if (a.probs.size() != b.probs.size())
    throw std::invalid_argument("target length mismatch");
  SoftTarget out;
  out.probs.resize(a.probs.size());
  for (std::size_t c = 0; c < a.probs.size(); ++c)
    out.probs[c] = w * a.probs[c] + (1.0 - w) * b.probs[c];
  return out;
}

SoftTarget reweight_target_hard(const SoftTarget& y_i, const SoftTarget& y_j, double p_u) {
  return mix_targets(y_i, y_j, p_u);
}

SoftTarget reweight_target_soft(const SoftTarget& y_i, const SoftTarget& y_j, double p_u,
                                double lambda) {
  return mix_targets(y_i, mix_targets(y_i, y_j, lambda), p_u);
}

// log softmax of one logits row, numerically stable
static std::vector<double> log_softmax_row(const Tensor& logits, std::size_t row) {
  const std::size_t C = logits.dim(1);
  double mx = logits.at(row, std::size_t{0});
  for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, logits.at(row, c));
  if (!std::isfinite(mx)) throw std::invalid_argument("cross_entropy: non-finite logits");
  double denom = 0.0;
  for (std::size_t c = 0; c < C; ++c) denom += std::exp(logits.at(row, c) - mx);
  const double lse = mx + std::log(denom);
  std::vector<double> out(C);
  for (std::size_t c = 0; c < C; ++c) out[c] = logits.at(row, c) - lse;
  return out;
}

double cross_entropy(const Tensor& logits, const std::vector<SoftTarget>& targets) {
  if (logits.rank() != 2 || logits.dim(0) != targets.size())
    throw std::invalid_argument("cross_entropy: logits/targets batch mismatch");
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  double total = 0.0;
  for (std::size_t b = 0; b < B; ++b) {
    if (targets[b].probs.size() != C)
      throw std::invalid_argument("cross_entropy: target length mismatch");
    const auto ls = log_softmax_row(logits, b);
    for (std::size_t c = 0; c < C; ++c) total -= targets[b].probs[c] * ls[c];
  }
  return total / static_cast<double>(B);
}

Tensor cross_entropy_grad(const Tensor& logits, const std::vector<SoftTarget>& targets) {
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  Tensor grad(logits.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const auto ls = log_softmax_row(logits, b);
    for (std::size_t c = 0; c < C; ++c)
      grad.at(b, c) = (std::exp(ls[c]) - targets[b].probs[c]) / static_cast<double>(B);
  }
  return grad;
}

static void check_unit_interval(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0))
    throw std::invalid_argument(std::string(name) + " must be in [0,1], got " +
                                std::to_string(v));
}

// Y and W targets for the two loss terms under the given mode.
static void build_targets(const std::vector<SoftTarget>& y_i,
                          const std::vector<SoftTarget>& y_j, double p_u, double lambda,
                          PatchUpMode mode, std::vector<SoftTarget>& Y,
                          std::vector<SoftTarget>& W) {
  Y.reserve(y_i.size());
  W.reserve(y_i.size());
  for (std::size_t b = 0; b < y_i.size(); ++b) {
    if (mode == PatchUpMode::kHard) {
      Y.push_back(y_j[b]);
      W.push_back(reweight_target_hard(y_i[b], y_j[b], p_u));
    } else {
      Y.push_back(mix_targets(y_i[b], y_j[b], lambda));
      W.push_back(reweight_target_soft(y_i[b], y_j[b], p_u, lambda));
    }
  }
}

LossBreakdown patchup_loss(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                           const std::vector<SoftTarget>& y_j, double p_u, double lambda,
                           PatchUpMode mode, LossTerms enabled) {
  check_unit_interval(p_u, "p_u");
  check_unit_interval(lambda, "lambda");
  std::vector<SoftTarget> Y, W;
  build_targets(y_i, y_j, p_u, lambda, mode, Y, W);
  LossBreakdown out;
  out.enabled = enabled;
  out.l1 = p_u * cross_entropy(logits, y_i) + (1.0 - p_u) * cross_entropy(logits, Y);
  out.l2 = cross_entropy(logits, W);
  switch (enabled) {
    case LossTerms::kBoth: out.total = out.l1 + out.l2; break;
    case LossTerms::kL1Only: out.total = out.l1; break;
    case LossTerms::kL2Only: out.total = out.l2; break;
  }
  return out;
}

Tensor patchup_loss_grad(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                         const std::vector<SoftTarget>& y_j, double p_u, double lambda,
                         PatchUpMode mode, LossTerms enabled) {
  check_unit_interval(p_u, "p_u");
  check_unit_interval(lambda, "lambda");
  std::vector<SoftTarget> Y, W;
  build_targets(y_i, y_j, p_u, lambda, mode, Y, W);
  // CE is linear in the target, so each term's gradient is softmax minus an
  // effective target.
  const std::size_t B = logits.dim(0), C = logits.dim(1);
  std::vector<SoftTarget> eff(B);
  double scale = 0.0;  // multiples of (softmax - .)/B to accumulate
  for (std::size_t b = 0; b < B; ++b) eff[b].probs.assign(C, 0.0);
  auto add = [&](const std::vector<SoftTarget>& t, double w) {
    for (std::size_t b = 0; b < B; ++b)
      for (std::size_t c = 0; c < C; ++c) eff[b].probs[c] += w * t[b].probs[c];
    scale += w;
  };
  if (enabled != LossTerms::kL2Only) {
    add(y_i, p_u);
    add(Y, 1.0 - p_u);
  }
  if (enabled != LossTerms::kL1Only) add(W, 1.0);
  Tensor grad(logits.shape());
  for (std::size_t b = 0; b < B; ++b) {
    const auto ls = log_softmax_row(logits, b);
    for (std::size_t c = 0; c < C; ++c)
      grad.at(b, c) =
          (scale * std::exp(ls[c]) - eff[b].probs[c]) / static_cast<double>(B);
  }
  return grad;
}

double mixup_loss(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                  const std::vector<SoftTarget>& y_j, double lambda) {
  std::vector<SoftTarget> mixed;
  mixed.reserve(y_i.size());
  for (std::size_t b = 0; b < y_i.size(); ++b)
    mixed.push_back(mix_targets(y_i[b], y_j[b], lambda));
  return cross_entropy(logits, mixed);
}

Tensor mixup_loss_grad(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                       const std::vector<SoftTarget>& y_j, double lambda) {
  std::vector<SoftTarget> mixed;
  mixed.reserve(y_i.size());
  for (std::size_t b = 0; b < y_i.size(); ++b)
    mixed.push_back(mix_targets(y_i[b], y_j[b], lambda));
  return cross_entropy_grad(logits, mixed);
}

double cutmix_loss(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                   const std::vector<SoftTarget>& y_j, double p_u) {
  return p_u * cross_entropy(logits, y_i) + (1.0 - p_u) * cross_entropy(logits, y_j);
}

Tensor cutmix_loss_grad(const Tensor& logits, const std::vector<SoftTarget>& y_i,
                        const std::vector<SoftTarget>& y_j, double p_u) {
  // same as CE against the p_u-mixed target, by linearity
  std::vector<SoftTarget> mixed;
  mixed.reserve(y_i.size());
  for (std::size_t b = 0; b < y_i.size(); ++b)
    mixed.push_back(mix_targets(y_i[b], y_j[b], p_u));
  return cross_entropy_grad(logits, mixed);
}

}  // namespace patchup
