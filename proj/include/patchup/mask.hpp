#pragma once

#include <cstdint>
#include <vector>

#include "patchup/rng.hpp"

namespace patchup {

/// Parameters for DropBlock-style mask sampling over a feature-map grid.
struct MaskParams {
  double gamma = 0.5;      // target per-feature alteration probability
  int block_size = 7;      // odd side length of the square block
  int feat_height = 0;
  int feat_width = 0;

  void validate() const;
};

/// 2-D {0,1} grid, 1 = keep, 0 = alter. The zero-set is a union of
/// block_size x block_size squares centered on sampled seed cells.
struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> grid;  // row-major

  std::uint8_t at(int i, int j) const { return grid[static_cast<std::size_t>(i) * width + j]; }
  std::uint8_t& at(int i, int j) { return grid[static_cast<std::size_t>(i) * width + j]; }
  std::size_t size() const { return grid.size(); }
};

/// Adjusted Bernoulli rate compensating for block area and the valid seed
/// placement region, clamped to [0,1].
double adjust_gamma(const MaskParams& params);

/// I.i.d. Bernoulli(gamma_adj) seed indicators restricted to the valid center
/// region; border cells are always 0.
BinaryMask sample_seed_grid(const MaskParams& params, Rng& rng);

/// Sliding-window maximum of the seed grid (window block_size, stride 1,
/// half-window zero padding), complemented. Overlapping blocks merge.
BinaryMask expand_seeds_to_mask(const BinaryMask& seeds, int block_size);

/// sample_seed_grid composed with expand_seeds_to_mask.
BinaryMask sample_mask(const MaskParams& params, Rng& rng);

/// Fraction of cells left unchanged (mean of the mask entries), p_u.
double unchanged_fraction(const BinaryMask& mask);

}  // namespace patchup
