#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "scca/types.hpp"

namespace scca::sar {

// Sparse alternating regression: each canonical vector pair is found by
// alternating lasso regressions of one side's variate on the other side's
// data matrix, after deflating both matrices by the variates already
// extracted. Higher-order vectors are re-expressed on the original (centered)
// data so the reported coefficients always refer to the original variables.

struct SarConfig {
  double epsilon = 1e-3;           // successive-vector angle threshold
  std::size_t max_iterations = 500;
  std::size_t n_lambda = 50;       // penalty path length for BIC selection
  std::optional<std::size_t> rank; // empty = maximum eigenvalue ratio criterion
  // Empty: every regression picks its penalty by BIC. Otherwise pair l uses
  // lambda_overrides[min(l, size-1)] for all of its regressions.
  std::vector<double> lambda_overrides;
  std::uint64_t seed = 12345;      // drives the ridge-initialization CV folds
  bool ridge_init = true;          // false: start from the cross-covariance SVD
};

struct ConvergenceTrace {
  std::vector<double> angle_a;  // angle between successive a iterates
  std::vector<double> angle_b;
};

/// Converged state of one pair's alternating loop, on the deflated data.
struct PairFit {
  Vec a, b;  // unit-norm coefficient iterates
  Vec u, v;  // variates on the deflated data
  ConvergenceTrace trace;
  std::size_t iterations = 0;
  bool converged = false;
  double lambda_a = 0.0, lambda_b = 0.0;  // penalties of the last iteration
};

/// Penalties and loop outcome behind each final vector pair. For pair 1 the
/// lambdas are the last inner-loop selections; for later pairs they are the
/// penalties of the re-expression regressions that produced the final vectors.
struct PairSummary {
  double lambda_a = 0.0;
  double lambda_b = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct SarModel {
  Mat a_sparse;    // p x r
  Mat b_sparse;    // q x r
  Mat variates_u;  // n x r, exactly X0 * a_sparse
  Mat variates_v;  // n x r, exactly Y0 * b_sparse
  Vec rho_hat;     // sample correlation of each variate pair
  std::vector<PairSummary> pairs;

  std::size_t rank() const { return pairs.size(); }
};

/// True iff both successive-iterate angles (sign ignored) are below epsilon.
bool convergence_check(const Vec& a_prev, const Vec& a_cur, const Vec& b_prev,
                       const Vec& b_cur, double epsilon);

/// Residual of the columns of M after regression on w:
/// M - w (w'w)^{-1} w' M. Every column of the result is orthogonal to w.
Mat deflate(const Mat& m, const Vec& w);

struct Expressed {
  Vec coeffs;
  double lambda = 0.0;
};

/// Map a converged variate back to coefficients on the original data:
/// orthogonalize `target` against the previously extracted variates, then
/// lasso-regress the residual on x0 (penalty by BIC unless overridden).
/// With no previous variates this is the first pair and the converged
/// inner-loop coefficients `base_coeffs` are returned unchanged.
Expressed express_in_original(const Vec& target, const Vec& base_coeffs,
                              const Mat& prev_variates, const Mat& x0,
                              const SarConfig& config,
                              std::optional<double> lambda_override = {});

/// Alternating lasso loop for one pair on (already deflated) data.
PairFit sar_pair_inner(const Mat& xd, const Mat& yd, const Vec& b_init,
                       const SarConfig& config,
                       std::optional<double> lambda_override = {});

/// Full algorithm: center, pick the rank if not fixed, then per pair deflate,
/// initialize from the canonical ridge, alternate to convergence and
/// re-express on the original data.
SarModel sar_fit(const Mat& x, const Mat& y, const SarConfig& config = {});

}  // namespace scca::sar
