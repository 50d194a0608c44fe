#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "scca/types.hpp"

namespace scca::cca {

/// Canonical vectors (columns of a, b) and their correlations, descending.
/// Column signs are fixed by making the largest-magnitude entry of each
/// x-side vector positive; the paired y-side vector is flipped with it so the
/// correlation of every variate pair stays nonnegative.
struct CcaModel {
  Mat a;    // p x r
  Mat b;    // q x r
  Vec rho;  // length r, in [0, 1] up to rounding
};

struct RidgeParams {
  double k1 = 0.0;
  double k2 = 0.0;
};

struct RankSelection {
  std::size_t rank = 1;
  bool degenerate_spectrum = false;  // the whole spectrum sat below the floor
};

/// Classical CCA on centered data, computed through the whitened
/// cross-covariance (symmetric route). The canonical variates X a_i have unit
/// sample variance. Throws SingularityError when a within-set covariance is
/// not invertible.
CcaModel classical_cca(const Mat& x, const Mat& y, std::size_t r);

/// Exact population solution from a joint (p+q) x (p+q) covariance matrix.
CcaModel population_cca(const Mat& sigma, std::size_t p, std::size_t q,
                        std::size_t r);

/// Classical construction with k1 I / k2 I added to the within-set
/// covariances before inversion. k = 0 reduces to classical_cca.
CcaModel canonical_ridge(const Mat& x, const Mat& y, const RidgeParams& params,
                         std::size_t r);

/// Ten log-spaced values in [1e-3, 1e1], the default search grid for each
/// ridge penalty.
std::vector<double> default_ridge_grid();

/// Pick the (k1, k2) grid pair maximizing the mean over folds of the first
/// test-sample canonical correlation. Folds come from a seeded shuffle cut
/// into contiguous blocks; a degenerate fold contributes 0. Ties go to the
/// larger pair.
RidgeParams ridge_cv(const Mat& x, const Mat& y,
                     const std::vector<double>& grid1,
                     const std::vector<double>& grid2, std::size_t folds,
                     std::uint64_t seed);

/// Maximum eigenvalue ratio criterion: r = argmax_j rho_j / rho_{j+1}, the
/// trailing value floored at 1e-8. A spectrum entirely below the floor
/// returns rank 1 flagged as degenerate.
RankSelection select_rank(const Vec& rho);

}  // namespace scca::cca
