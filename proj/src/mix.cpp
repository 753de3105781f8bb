#include "patchup/mix.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace patchup {

std::string to_string(MixMode mode) {
  switch (mode) {
    case MixMode::kNone: return "none";
    case MixMode::kHard: return "hard";
    case MixMode::kSoft: return "soft";
    case MixMode::kInputHard: return "input_hard";
    case MixMode::kMixup: return "mixup";
    case MixMode::kManifoldMixup: return "manifold_mixup";
    case MixMode::kCutMix: return "cutmix";
    case MixMode::kCutout: return "cutout";
    case MixMode::kDropBlock: return "dropblock";
  }
  return "none";
}

MixMode mix_mode_from_string(const std::string& name) {
  if (name == "none") return MixMode::kNone;
  if (name == "hard") return MixMode::kHard;
  if (name == "soft") return MixMode::kSoft;
  if (name == "input_hard") return MixMode::kInputHard;
  if (name == "mixup") return MixMode::kMixup;
  if (name == "manifold_mixup") return MixMode::kManifoldMixup;
  if (name == "cutmix") return MixMode::kCutMix;
  if (name == "cutout") return MixMode::kCutout;
  if (name == "dropblock") return MixMode::kDropBlock;
  throw std::invalid_argument("unknown regularizer mode: " + name);
}

Tensor mix_lambda(const Tensor& a, const Tensor& b, double lambda) {
  require_same_shape(a, b, "mix_lambda");
  Tensor out(a.shape());
  for (std::size_t i = 0; i < a.numel(); ++i)
    out[i] = lambda * a[i] + (1.0 - lambda) * b[i];
  return out;
}

static void require_mask_fits(const Tensor& h, const BinaryMask& mask, const char* op) {
  if (h.rank() != 4)
    throw std::invalid_argument(std::string(op) + ": expected rank-4 tensor");
  if (static_cast<int>(h.dim(2)) != mask.height || static_cast<int>(h.dim(3)) != mask.width)
    throw std::invalid_argument(std::string(op) + ": mask spatial dims do not match tensor");
}

Tensor hard_patchup(const Tensor& h_i, const Tensor& h_j, const BinaryMask& mask) {
  require_same_shape(h_i, h_j, "hard_patchup");
  require_mask_fits(h_i, mask, "hard_patchup");
  Tensor out(h_i.shape());
  const std::size_t B = h_i.dim(0), C = h_i.dim(1), H = h_i.dim(2), W = h_i.dim(3);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x)
          out.at(b, c, y, x) = mask.at(static_cast<int>(y), static_cast<int>(x))
                                   ? h_i.at(b, c, y, x)
                                   : h_j.at(b, c, y, x);
  return out;
}

Tensor soft_patchup(const Tensor& h_i, const Tensor& h_j, const BinaryMask& mask,
                    double lambda) {
  require_same_shape(h_i, h_j, "soft_patchup");
  require_mask_fits(h_i, mask, "soft_patchup");
  Tensor out(h_i.shape());
  const std::size_t B = h_i.dim(0), C = h_i.dim(1), H = h_i.dim(2), W = h_i.dim(3);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x) {
          if (mask.at(static_cast<int>(y), static_cast<int>(x)))
            out.at(b, c, y, x) = h_i.at(b, c, y, x);
          else
            out.at(b, c, y, x) =
                lambda * h_i.at(b, c, y, x) + (1.0 - lambda) * h_j.at(b, c, y, x);
        }
  return out;
}

// Rectangle with side ratios sqrt(1-lambda), uniform center, clipped at
// borders. Returns {y0, y1, x0, x1} half-open.
static std::array<int, 4> sample_rect(std::size_t H, std::size_t W, Rng& rng,
                                      double lambda) {
  const double ratio = std::sqrt(std::max(0.0, 1.0 - lambda));
  const int rh = static_cast<int>(std::round(ratio * static_cast<double>(H)));
  const int rw = static_cast<int>(std::round(ratio * static_cast<double>(W)));
  const int cy = std::uniform_int_distribution<int>(0, static_cast<int>(H) - 1)(rng);
  const int cx = std::uniform_int_distribution<int>(0, static_cast<int>(W) - 1)(rng);
  const int y0 = std::clamp(cy - rh / 2, 0, static_cast<int>(H));
  const int y1 = std::clamp(cy - rh / 2 + rh, 0, static_cast<int>(H));
  const int x0 = std::clamp(cx - rw / 2, 0, static_cast<int>(W));
  const int x1 = std::clamp(cx - rw / 2 + rw, 0, static_cast<int>(W));
  return {y0, y1, x0, x1};
}

std::pair<Tensor, double> input_hard_patchup(const Tensor& x_i, const Tensor& x_j,
                                             Rng& rng, double lambda) {
  require_same_shape(x_i, x_j, "input_hard_patchup");
  if (x_i.rank() != 4)
    throw std::invalid_argument("input_hard_patchup: expected rank-4 tensor");
  const std::size_t B = x_i.dim(0), C = x_i.dim(1), H = x_i.dim(2), W = x_i.dim(3);
  Tensor out = x_i;
  if (lambda >= 1.0) return {out, 1.0};
  const auto [y0, y1, x0, x1] = sample_rect(H, W, rng, lambda);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          out.at(b, c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
              x_j.at(b, c, static_cast<std::size_t>(y), static_cast<std::size_t>(x));
  const double area = static_cast<double>(y1 - y0) * (x1 - x0);
  const double p_u = 1.0 - area / (static_cast<double>(H) * static_cast<double>(W));
  return {out, p_u};
}

Tensor mixup_op(const Tensor& x_i, const Tensor& x_j, double lambda) {
  return mix_lambda(x_i, x_j, lambda);
}

Tensor manifold_mixup_op(const Tensor& h_i, const Tensor& h_j, double lambda) {
  return mix_lambda(h_i, h_j, lambda);
}

std::pair<Tensor, double> cutmix_op(const Tensor& x_i, const Tensor& x_j, Rng& rng,
                                    double lambda) {
  return input_hard_patchup(x_i, x_j, rng, lambda);
}

Tensor cutout_op(const Tensor& x, Rng& rng, int cut_size) {
  if (x.rank() != 4) throw std::invalid_argument("cutout_op: expected rank-4 tensor");
  if (cut_size < 0) throw std::invalid_argument("cutout_op: cut_size must be nonnegative");
  Tensor out = x;
  if (cut_size == 0) return out;
  const std::size_t B = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
  for (std::size_t b = 0; b < B; ++b) {
    const int cy = std::uniform_int_distribution<int>(0, static_cast<int>(H) - 1)(rng);
    const int cx = std::uniform_int_distribution<int>(0, static_cast<int>(W) - 1)(rng);
    const int y0 = std::max(0, cy - cut_size / 2);
    const int y1 = std::min(static_cast<int>(H), cy - cut_size / 2 + cut_size);
    const int x0 = std::max(0, cx - cut_size / 2);
    const int x1 = std::min(static_cast<int>(W), cx - cut_size / 2 + cut_size);
    for (std::size_t c = 0; c < C; ++c)
      for (int y = y0; y < y1; ++y)
        for (int xx = x0; xx < x1; ++xx)
          out.at(b, c, static_cast<std::size_t>(y), static_cast<std::size_t>(xx)) = 0.0;
  }
  return out;
}

Tensor dropblock_op(const Tensor& h, const MaskParams& params, Rng& rng) {
  if (h.rank() != 4) throw std::invalid_argument("dropblock_op: expected rank-4 tensor");
  return dropblock_apply(h, sample_mask(params, rng));
}

Tensor dropblock_apply(const Tensor& h, const BinaryMask& mask) {
  require_mask_fits(h, mask, "dropblock_op");
  std::size_t kept = 0;
  for (auto v : mask.grid) kept += v;
  if (kept == 0)
    throw std::runtime_error("dropblock_op: degenerate mask (all features dropped)");
  const double scale = static_cast<double>(mask.grid.size()) / static_cast<double>(kept);
  Tensor out(h.shape());
  const std::size_t B = h.dim(0), C = h.dim(1), H = h.dim(2), W = h.dim(3);
  for (std::size_t b = 0; b < B; ++b)
    for (std::size_t c = 0; c < C; ++c)
      for (std::size_t y = 0; y < H; ++y)
        for (std::size_t x = 0; x < W; ++x)
          out.at(b, c, y, x) =
              mask.at(static_cast<int>(y), static_cast<int>(x)) ? h.at(b, c, y, x) * scale : 0.0;
  return out;
}

Tensor permute_batch(const Tensor& t, const std::vector<std::size_t>& perm) {
  if (t.rank() < 1 || perm.size() != t.dim(0))
    throw std::invalid_argument("permute_batch: permutation length does not match batch");
  Tensor out(t.shape());
  const std::size_t stride = t.numel() / t.dim(0);
  for (std::size_t b = 0; b < perm.size(); ++b)
    std::copy_n(t.data() + perm[b] * stride, stride, out.data() + b * stride);
  return out;
}

std::vector<std::size_t> random_permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

}  // namespace patchup
