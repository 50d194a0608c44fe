#pragma once

#include "scca/types.hpp"

namespace scca::linalg {

struct CenteredMatrix {
  Mat centered;  // columns sum to zero
  Vec means;     // per-column means removed
};

/// Symmetric eigen decomposition, eigenvalues sorted descending, eigenvectors
/// unit norm with the largest-magnitude entry made positive.
struct EigenResult {
  Vec values;
  Mat vectors;  // column i pairs with values(i)
};

/// Remove column means. Requires at least two rows.
CenteredMatrix center_columns(const Mat& x);

/// Cross-covariance X'Y / (n - 1) of two centered matrices sharing rows.
Mat sample_covariance(const Mat& xc, const Mat& yc);

EigenResult symmetric_eigen(const Mat& s);

/// Lower-triangular L with L L' = S. Pivots at or below 1e-12 relative to the
/// largest diagonal entry reject the matrix as not positive definite.
Mat cholesky(const Mat& s);

/// Minimum-norm-free least squares; X must have full column rank (pivot
/// tolerance 1e-12). Rank-deficient designs are rejected so callers fall back
/// to a penalized fit.
Vec least_squares(const Mat& x, const Vec& y);

/// Largest principal angle between span(A) and span(B), in [0, pi/2].
/// Invariant to column scaling, sign, and invertible column mixing.
double principal_subspace_angle(const Mat& a, const Mat& b);

/// Angle between the lines spanned by two nonzero vectors (sign ignored),
/// computed through the chord length so tiny angles keep full precision.
double vector_angle(const Vec& a, const Vec& b);

}  // namespace scca::linalg
