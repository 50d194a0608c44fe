#include "scca/cca.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "scca/errors.hpp"
#include "scca/linalg.hpp"
#include "scca/rng.hpp"

namespace scca::cca {

namespace {

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

// (S + k I)^{-1/2} from the eigen decomposition of S. Adding k only shifts
// the eigenvalues, so one decomposition serves every penalty value.
Mat inverse_sqrt(const linalg::EigenResult& es, double k) {
  const Index n = es.values.size();
  double top = es.values(0) + k;
  double bottom = es.values(n - 1) + k;
  if (bottom <= 1e-12 * std::max(top, 1e-300))
    throw SingularityError(
        "within-set covariance is singular; add a ridge penalty or use the "
        "sparse fit");
  Vec scaled = (es.values.array() + k).rsqrt();
  return es.vectors * scaled.asDiagonal() * es.vectors.transpose();
}

CcaModel from_eigens(const linalg::EigenResult& exx, const Mat& sxy,
                     const linalg::EigenResult& eyy, double k1, double k2,
                     std::size_t r) {
  Mat wx = inverse_sqrt(exx, k1);
  Mat wy = inverse_sqrt(eyy, k2);
  Mat k = wx * sxy * wy;
  Eigen::JacobiSVD<Mat> svd(k, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto rr = static_cast<Index>(r);
  CcaModel model;
  model.rho = svd.singularValues().head(rr);
  model.a = wx * svd.matrixU().leftCols(rr);
  model.b = wy * svd.matrixV().leftCols(rr);
  for (Index j = 0; j < rr; ++j) {
    Index imax = 0;
    model.a.col(j).cwiseAbs().maxCoeff(&imax);
    if (model.a(imax, j) < 0.0) {
      // flip the pair together so the variate correlation keeps its sign
      model.a.col(j) = -model.a.col(j);
      model.b.col(j) = -model.b.col(j);
    }
  }
  return model;
}

void check_rank_request(Index p, Index q, std::size_t r) {
  if (r < 1 || static_cast<Index>(r) > std::min(p, q))
    throw ContractError("requested rank " + std::to_string(r) +
                        " outside 1.." + std::to_string(std::min(p, q)));
}

CcaModel sample_fit(const Mat& x, const Mat& y, double k1, double k2,
                    std::size_t r) {
  if (x.rows() != y.rows())
    throw ShapeError("data sets have " + std::to_string(x.rows()) + " vs " +
                     std::to_string(y.rows()) + " rows");
  check_rank_request(x.cols(), y.cols(), r);
  Mat sxx = symmetrized(linalg::sample_covariance(x, x));
  Mat syy = symmetrized(linalg::sample_covariance(y, y));
  Mat sxy = linalg::sample_covariance(x, y);
  return from_eigens(linalg::symmetric_eigen(sxx), sxy,
                     linalg::symmetric_eigen(syy), k1, k2, r);
}

// Leading singular pair of k by power iteration on k'k; deterministic start
// at the largest-norm column. Enough accuracy for scoring a CV fold at a
// fraction of a full SVD's cost.
bool leading_pair(const Mat& k, Vec& u, Vec& v) {
  Index jmax = 0;
  double best = -1.0;
  for (Index j = 0; j < k.cols(); ++j) {
    double nj = k.col(j).squaredNorm();
    if (nj > best) {
      best = nj;
      jmax = j;
    }
  }
  if (best <= 0.0) return false;
  v = Vec::Zero(k.cols());
  v(jmax) = 1.0;
  for (int it = 0; it < 500; ++it) {
    Vec w = k * v;
    Vec next = k.transpose() * w;
    double norm = next.norm();
    if (norm == 0.0) return false;
    next /= norm;
    double change = (next - v).norm();
    v = next;
    if (change <= 1e-12) break;
  }
  Vec w = k * v;
  double norm = w.norm();
  if (norm == 0.0) return false;
  u = w / norm;
  return true;
}

double pearson(const Vec& a, const Vec& b) {
  Vec ac = a.array() - a.mean();
  Vec bc = b.array() - b.mean();
  double denom = ac.norm() * bc.norm();
  if (denom == 0.0) return 0.0;
  double r = ac.dot(bc) / denom;
  return std::isfinite(r) ? r : 0.0;
}

}  // namespace

CcaModel classical_cca(const Mat& x, const Mat& y, std::size_t r) {
  return sample_fit(x, y, 0.0, 0.0, r);
}

CcaModel population_cca(const Mat& sigma, std::size_t p, std::size_t q,
                        std::size_t r) {
  const auto pi = static_cast<Index>(p);
  const auto qi = static_cast<Index>(q);
  if (sigma.rows() != pi + qi || sigma.cols() != pi + qi)
    throw ShapeError("joint covariance must be (p+q) x (p+q)");
  check_rank_request(pi, qi, r);
  linalg::cholesky(sigma);  // rejects asymmetric or non-PD input
  Mat sxx = sigma.topLeftCorner(pi, pi);
  Mat sxy = sigma.topRightCorner(pi, qi);
  Mat syy = sigma.bottomRightCorner(qi, qi);
  return from_eigens(linalg::symmetric_eigen(sxx), sxy,
                     linalg::symmetric_eigen(syy), 0.0, 0.0, r);
}

CcaModel canonical_ridge(const Mat& x, const Mat& y, const RidgeParams& params,
                         std::size_t r) {
  if (params.k1 < 0.0 || params.k2 < 0.0)
    throw ContractError("ridge penalties must be nonnegative");
  return sample_fit(x, y, params.k1, params.k2, r);
}

std::vector<double> default_ridge_grid() {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i)
    grid[i] = std::pow(10.0, -3.0 + 4.0 * i / 9.0);
  return grid;
}

RidgeParams ridge_cv(const Mat& x, const Mat& y,
                     const std::vector<double>& grid1,
                     const std::vector<double>& grid2, std::size_t folds,
                     std::uint64_t seed) {
  if (grid1.empty() || grid2.empty()) throw ContractError("empty penalty grid");
  if (folds < 2) throw ContractError("cross-validation needs at least 2 folds");
  if (x.rows() != y.rows()) throw ShapeError("data sets differ in rows");
  const Index n = x.rows();
  if (n < static_cast<Index>(folds))
    throw DegenerateInputError("fewer observations than folds");

  std::vector<std::size_t> order = Rng(seed).permutation(static_cast<std::size_t>(n));
  Mat scores = Mat::Zero(static_cast<Index>(grid1.size()),
                         static_cast<Index>(grid2.size()));

  for (std::size_t f = 0; f < folds; ++f) {
    std::size_t lo = f * static_cast<std::size_t>(n) / folds;
    std::size_t hi = (f + 1) * static_cast<std::size_t>(n) / folds;
    Index n_test = static_cast<Index>(hi - lo);
    Index n_train = n - n_test;
    Mat xtr(n_train, x.cols()), ytr(n_train, y.cols());
    Mat xte(n_test, x.cols()), yte(n_test, y.cols());
    Index it = 0, ie = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      auto row = static_cast<Index>(order[i]);
      if (i >= lo && i < hi) {
        xte.row(ie) = x.row(row);
        yte.row(ie++) = y.row(row);
      } else {
        xtr.row(it) = x.row(row);
        ytr.row(it++) = y.row(row);
      }
    }
    try {
      auto cx = linalg::center_columns(xtr);
      auto cy = linalg::center_columns(ytr);
      Mat sxx = symmetrized(linalg::sample_covariance(cx.centered, cx.centered));
      Mat syy = symmetrized(linalg::sample_covariance(cy.centered, cy.centered));
      Mat sxy = linalg::sample_covariance(cx.centered, cy.centered);
      auto exx = linalg::symmetric_eigen(sxx);
      auto eyy = linalg::symmetric_eigen(syy);
      Mat xte_c = xte.rowwise() - cx.means.transpose();
      Mat yte_c = yte.rowwise() - cy.means.transpose();
      // Each whitening depends on one penalty only, so build them once per
      // fold instead of once per grid cell.
      std::vector<Mat> wys(grid2.size()), yte_w(grid2.size());
      for (std::size_t i2 = 0; i2 < grid2.size(); ++i2) {
        wys[i2] = inverse_sqrt(eyy, grid2[i2]);
        yte_w[i2] = yte_c * wys[i2];
      }
      for (std::size_t i1 = 0; i1 < grid1.size(); ++i1) {
        Mat wx = inverse_sqrt(exx, grid1[i1]);
        Mat half = wx * sxy;
        Mat xte_w = xte_c * wx;
        for (std::size_t i2 = 0; i2 < grid2.size(); ++i2) {
          Mat k = half * wys[i2];
          Vec u, v;
          if (!leading_pair(k, u, v)) continue;  // no association, score 0
          scores(static_cast<Index>(i1), static_cast<Index>(i2)) +=
              pearson(xte_w * u, yte_w[i2] * v);
        }
      }
    } catch (const Error&) {
      // degenerate fold: its scores stay 0
    }
  }

  RidgeParams best{grid1[0], grid2[0]};
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t i1 = 0; i1 < grid1.size(); ++i1) {
    for (std::size_t i2 = 0; i2 < grid2.size(); ++i2) {
      double mean =
          scores(static_cast<Index>(i1), static_cast<Index>(i2)) / folds;
      bool better = mean > best_score;
      bool tie_larger =
          mean == best_score &&
          (grid1[i1] > best.k1 || (grid1[i1] == best.k1 && grid2[i2] > best.k2));
      if (better || tie_larger) {
        best_score = mean;
        best = {grid1[i1], grid2[i2]};
      }
    }
  }
  return best;
}

RankSelection select_rank(const Vec& rho) {
  if (rho.size() < 2)
    throw DegenerateInputError("rank selection needs at least 2 correlations");
  for (Index i = 0; i + 1 < rho.size(); ++i)
    if (rho(i) < rho(i + 1) - 1e-12)
      throw ContractError("correlations must be sorted descending");
  if (rho.maxCoeff() <= 1e-8) return {1, true};
  std::size_t best = 0;
  double best_ratio = -1.0;
  for (Index j = 0; j + 1 < rho.size(); ++j) {
    double ratio = rho(j) / std::max(rho(j + 1), 1e-8);
    if (ratio > best_ratio) {  // strict: ties keep the smallest rank
      best_ratio = ratio;
      best = static_cast<std::size_t>(j);
    }
  }
  return {best + 1, false};
}

}  // namespace scca::cca
