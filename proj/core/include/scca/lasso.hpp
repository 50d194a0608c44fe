#pragma once

#include <cstddef>
#include <vector>

#include "scca/types.hpp"

namespace scca::lasso {

// Penalized objective throughout this module:
//   ||y - X b||^2 + lambda * sum_j |b_j|
// i.e. raw sum of squares, no 1/n or 1/2 factor. Under this scaling the
// all-zero solution appears at lambda_max = 2 max_j |x_j' y| and the
// orthonormal-design solution is soft thresholding at lambda / 2.

struct LassoSolution {
  Vec beta;
  double lambda = 0.0;
  double rss = 0.0;              // ||y - X beta||^2, computed directly
  std::size_t active_count = 0;  // entries of beta that are not exactly 0.0
  std::size_t sweeps = 0;        // coordinate-descent sweeps used
};

/// Strictly decreasing penalty grid from lambda_max down to
/// lambda_max * 1e-3, or the single value {0} for a degenerate response.
struct LambdaPath {
  std::vector<double> values;
};

inline constexpr double kPathFloor = 1e-3;
inline constexpr std::size_t kDefaultPathLength = 50;
inline constexpr std::size_t kMaxSweeps = 10000;

double lambda_max(const Mat& x, const Vec& y);

/// Coordinate descent with covariance updates. lambda = 0 on a full-rank
/// design short-circuits to the least squares solution. Convergence: largest
/// coefficient change in a sweep <= 1e-7 * (1 + ||beta||_inf).
LassoSolution lasso_fit(const Mat& x, const Vec& y, double lambda);

/// Same fit, recording the penalized objective after every sweep.
LassoSolution lasso_fit_traced(const Mat& x, const Vec& y, double lambda,
                               std::vector<double>& objective_per_sweep);

LambdaPath lambda_path(const Mat& x, const Vec& y, std::size_t n_lambda);

inline constexpr std::size_t kNoActiveCap = static_cast<std::size_t>(-1);

/// Fit every penalty on the path in order. warm_start carries each solution
/// into the next fit; both routes satisfy the same KKT tolerance. Once a fit
/// keeps more than max_active coefficients the path stops there and that fit
/// is dropped; the first path entry is always kept. A fit that exhausts the
/// sweep budget also ends the path (the solved prefix is returned); only a
/// failure on the very first entry propagates.
std::vector<LassoSolution> path_fit(const Mat& x, const Vec& y,
                                    const LambdaPath& path,
                                    bool warm_start = true,
                                    std::size_t max_active = kNoActiveCap);

/// Index of the solution minimizing
///   BIC(lambda) = n log(rss/n) + k log(n),
/// k = number of nonzero coefficients, rss floored at rss_floor. Ties go to
/// the earlier (larger-penalty, sparser) solution.
std::size_t bic_choose(const std::vector<LassoSolution>& solutions,
                       std::size_t n, double rss_floor);

/// Fit the whole path and pick by BIC with floor 1e-12 ||y||^2.
LassoSolution bic_select(const Mat& x, const Vec& y, const LambdaPath& path);

/// Like bic_choose, but each candidate is scored with the rss of the
/// least-squares refit on its active set, the maximum-likelihood fit for
/// that support, and a caller-chosen charge per nonzero coefficient:
///   score = n log(rss_refit / n) + k * coef_penalty.
/// Scoring the penalized rss instead would mistake shrinkage bias for lack
/// of fit: with a strong signal the score keeps improving as the penalty
/// shrinks toward zero and the support silently goes dense. Pass log(n) for
/// the plain criterion; wide dictionaries warrant an extra multiplicity
/// charge (see the extended form log(n) + 2 log(p)).
std::size_t bic_choose_refit(const Mat& x, const Vec& y,
                             const std::vector<LassoSolution>& solutions,
                             double rss_floor, double coef_penalty);

}  // namespace scca::lasso
