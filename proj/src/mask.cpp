#include "patchup/mask.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace patchup {

void MaskParams::validate() const {
  if (gamma < 0.0 || gamma > 1.0)
    throw std::invalid_argument("MaskParams: gamma must be in [0,1], got " +
                                std::to_string(gamma));
  if (feat_height < 1 || feat_width < 1)
    throw std::invalid_argument("MaskParams: feature map dimensions must be positive");
  if (block_size < 1 || block_size > std::min(feat_height, feat_width))
    throw std::invalid_argument(
        "MaskParams: block_size must be in [1, min(feat_height, feat_width)], got " +
        std::to_string(block_size));
  if (block_size % 2 == 0)
    throw std::invalid_argument("MaskParams: block_size must be odd, got " +
                                std::to_string(block_size));
}

double adjust_gamma(const MaskParams& params) {
  params.validate();
  const double map_area = static_cast<double>(params.feat_height) * params.feat_width;
  const double block_area = static_cast<double>(params.block_size) * params.block_size;
  const double valid_area =
      static_cast<double>(params.feat_height - params.block_size + 1) *
      (params.feat_width - params.block_size + 1);
  const double adj = params.gamma * map_area / (block_area * valid_area);
  return std::clamp(adj, 0.0, 1.0);
}

BinaryMask sample_seed_grid(const MaskParams& params, Rng& rng) {
  const double gamma_adj = adjust_gamma(params);
  const int half = (params.block_size - 1) / 2;
  BinaryMask seeds;
  seeds.height = params.feat_height;
  seeds.width = params.feat_width;
  seeds.grid.assign(static_cast<std::size_t>(seeds.height) * seeds.width, 0);
  for (int i = half; i < seeds.height - half; ++i)
    for (int j = half; j < seeds.width - half; ++j)
      seeds.at(i, j) = uniform01(rng) < gamma_adj ? 1 : 0;
  return seeds;
}

BinaryMask expand_seeds_to_mask(const BinaryMask& seeds, int block_size) {
  if (block_size < 1 || block_size % 2 == 0)
    throw std::invalid_argument("expand_seeds_to_mask: block_size must be odd and positive");
  if (block_size > seeds.height || block_size > seeds.width)
    throw std::invalid_argument("expand_seeds_to_mask: block_size exceeds grid dimensions");
  const int half = (block_size - 1) / 2;
  BinaryMask mask;
  mask.height = seeds.height;
  mask.width = seeds.width;
  mask.grid.assign(seeds.grid.size(), 1);
  // sliding-window max, then complement; clips at borders
  for (int i = 0; i < mask.height; ++i) {
    for (int j = 0; j < mask.width; ++j) {
      std::uint8_t hit = 0;
      const int i0 = std::max(0, i - half), i1 = std::min(mask.height - 1, i + half);
      const int j0 = std::max(0, j - half), j1 = std::min(mask.width - 1, j + half);
      for (int a = i0; a <= i1 && !hit; ++a)
        for (int b = j0; b <= j1; ++b)
          if (seeds.at(a, b)) { hit = 1; break; }
      if (hit) mask.at(i, j) = 0;
    }
  }
  return mask;
}

BinaryMask sample_mask(const MaskParams& params, Rng& rng) {
  return expand_seeds_to_mask(sample_seed_grid(params, rng), params.block_size);
}

double unchanged_fraction(const BinaryMask& mask) {
  if (mask.grid.empty()) throw std::invalid_argument("unchanged_fraction: empty mask");
  std::size_t ones = 0;
  for (auto v : mask.grid) ones += v;
  return static_cast<double>(ones) / static_cast<double>(mask.grid.size());
}

}  // namespace patchup
