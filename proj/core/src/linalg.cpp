#include "scca/linalg.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "scca/errors.hpp"

namespace scca::linalg {

namespace {

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw ContractError(std::string(what) + " has non-finite entries");
}

// Largest-magnitude entry of each column made positive, first index on ties.
void fix_column_signs(Mat& v) {
  for (Index j = 0; j < v.cols(); ++j) {
    Index imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    if (v(imax, j) < 0.0) v.col(j) = -v.col(j);
  }
}

// Thin orthonormal basis of the column space; throws if rank < cols.
Mat orthonormal_basis(const Mat& m, const char* what) {
  Eigen::ColPivHouseholderQR<Mat> qr(m);
  qr.setThreshold(1e-12);
  if (qr.rank() < m.cols())
    throw RankError(std::string(what) + " is column rank deficient");
  Mat q = qr.householderQ();
  return q.leftCols(m.cols());
}

}  // namespace

CenteredMatrix center_columns(const Mat& x) {
  if (x.rows() < 2) throw DegenerateInputError("centering needs at least 2 rows");
  require_finite(x, "matrix");
  CenteredMatrix out;
  out.means = x.colwise().mean();
  out.centered = x.rowwise() - out.means.transpose();
  // second pass mops up the rounding left by the first subtraction
  Vec drift = out.centered.colwise().mean();
  out.centered.rowwise() -= drift.transpose();
  out.means += drift;
  return out;
}

Mat sample_covariance(const Mat& xc, const Mat& yc) {
  if (xc.rows() != yc.rows())
    throw ShapeError("covariance inputs have " + std::to_string(xc.rows()) +
                     " vs " + std::to_string(yc.rows()) + " rows");
  if (xc.rows() < 2) throw DegenerateInputError("covariance needs at least 2 rows");
  return xc.transpose() * yc / static_cast<double>(xc.rows() - 1);
}

EigenResult symmetric_eigen(const Mat& s) {
  if (s.rows() != s.cols()) throw ShapeError("eigen input is not square");
  require_finite(s, "matrix");
  double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ContractError("eigen input is not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> solver(s);
  if (solver.info() != Eigen::Success)
    throw ContractError("symmetric eigen decomposition failed");
  // Eigen sorts ascending; flip to descending
  EigenResult out;
  out.values = solver.eigenvalues().reverse();
  out.vectors = solver.eigenvectors().rowwise().reverse();
  fix_column_signs(out.vectors);
  return out;
}

Mat cholesky(const Mat& s) {
  // hand-rolled so the pivot rejection threshold is exactly the documented one
  if (s.rows() != s.cols()) throw ShapeError("cholesky input is not square");
  require_finite(s, "matrix");
  const Index n = s.rows();
  double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if ((s - s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw ContractError("cholesky input is not symmetric");
  double max_diag = s.diagonal().maxCoeff();
  if (max_diag <= 0.0)
    throw NotPositiveDefiniteError("matrix has no positive diagonal entry");
  const double floor = 1e-12 * max_diag;
  Mat l = Mat::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = s(j, j) - l.row(j).head(j).squaredNorm();
    if (d <= floor)
      throw NotPositiveDefiniteError("pivot " + std::to_string(j) +
                                     " at or below tolerance");
    l(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < n; ++i) {
      double v = s(i, j) - l.row(i).head(j).dot(l.row(j).head(j));
      l(i, j) = v / l(j, j);
    }
  }
  return l;
}

Vec least_squares(const Mat& x, const Vec& y) {
  if (x.rows() != y.size())
    throw ShapeError("design has " + std::to_string(x.rows()) +
                     " rows, response " + std::to_string(y.size()));
  require_finite(x, "design");
  if (!y.allFinite()) throw ContractError("response has non-finite entries");
  Eigen::ColPivHouseholderQR<Mat> qr(x);
  qr.setThreshold(1e-12);
  if (qr.rank() < x.cols())
    throw RankError("design is column rank deficient; use a penalized fit");
  return qr.solve(y);
}

double principal_subspace_angle(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("subspace angle needs equal shapes");
  if (a.cols() < 1) throw DegenerateInputError("empty subspace");
  Mat qa = orthonormal_basis(a, "first subspace argument");
  Mat qb = orthonormal_basis(b, "second subspace argument");
  Mat cross = qa.transpose() * qb;
  Eigen::JacobiSVD<Mat> svd(cross);
  double c = svd.singularValues().minCoeff();
  // cosine loses precision near 1; switch to the sine route for small angles
  if (c * c < 0.5) return std::acos(std::clamp(c, 0.0, 1.0));
  Mat residual = qb - qa * cross;
  Eigen::JacobiSVD<Mat> svd_s(residual);
  double sine = svd_s.singularValues().maxCoeff();
  return std::asin(std::clamp(sine, 0.0, 1.0));
}

double vector_angle(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ShapeError("angle needs equal-length vectors");
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0)
    throw DegenerateInputError("angle of a zero vector is undefined");
  Vec ua = a / na, ub = b / nb;
  if (ua.dot(ub) < 0.0) ub = -ub;
  // half-chord form keeps full precision when the angle is tiny
  double half_chord = 0.5 * (ua - ub).norm();
  return 2.0 * std::asin(std::min(1.0, half_chord));
}

}  // namespace scca::linalg
