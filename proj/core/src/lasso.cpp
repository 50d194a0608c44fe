#include "scca/lasso.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "scca/errors.hpp"
#include "scca/linalg.hpp"

namespace scca::lasso {

namespace {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

void validate(const Mat& x, const Vec& y, double lambda) {
  if (x.rows() != y.size())
    throw ShapeError("design has " + std::to_string(x.rows()) +
                     " rows, response " + std::to_string(y.size()));
  if (!x.allFinite() || !y.allFinite())
    throw ContractError("lasso inputs must be finite");
  if (!(lambda >= 0.0)) throw ContractError("negative penalty");
}

// X'X and X'y are shared across a path; the response norm fixes tolerances.
struct Workspace {
  const Mat& x;
  const Vec& y;
  Mat gram;
  Vec xty;
  double y_norm;

  Workspace(const Mat& x_in, const Vec& y_in)
      : x(x_in), y(y_in), gram(x_in.transpose() * x_in),
        xty(x_in.transpose() * y_in), y_norm(y_in.norm()) {}
};

bool kkt_satisfied(const Workspace& w, const Vec& beta, double lambda,
                   double tol) {
  // honest gradient from the data, not the incremental running copy
  Vec grad = 2.0 * (w.xty - w.gram * beta);
  for (Index j = 0; j < beta.size(); ++j) {
    if (beta(j) != 0.0) {
      if (std::abs(grad(j) - lambda * (beta(j) > 0.0 ? 1.0 : -1.0)) > tol)
        return false;
    } else if (std::abs(grad(j)) > lambda + tol) {
      return false;
    }
  }
  return true;
}

LassoSolution finish(const Workspace& w, Vec beta, double lambda,
                     std::size_t sweeps) {
  LassoSolution sol;
  sol.rss = (w.y - w.x * beta).squaredNorm();
  sol.active_count = 0;
  for (Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) ++sol.active_count;
  sol.beta = std::move(beta);
  sol.lambda = lambda;
  sol.sweeps = sweeps;
  return sol;
}

// Cyclic coordinate descent with covariance updates from a warm start.
// Sweeps stop once coefficients stall AND the KKT conditions verify; a stall
// without KKT tightens the stall threshold and keeps going.
LassoSolution cd_solve(const Workspace& w, double lambda, Vec beta,
                       std::vector<double>* objective_per_sweep) {
  const Index p = w.gram.rows();
  const double half = lambda / 2.0;
  const double kkt_tol = 5e-7 * std::max(w.y_norm, 1e-300);
  double stall_factor = 1e-7;
  Vec gb = w.gram * beta;  // running X'X beta
  std::size_t sweeps = 0;
  while (true) {
    double max_delta = 0.0;
    for (Index j = 0; j < p; ++j) {
      double d = w.gram(j, j);
      if (d <= 0.0) {  // exactly-zero column; its coefficient stays 0
        beta(j) = 0.0;
        continue;
      }
      double z = w.xty(j) - gb(j) + d * beta(j);
      double updated = soft_threshold(z, half) / d;
      double delta = updated - beta(j);
      if (delta != 0.0) {
        gb += delta * w.gram.col(j);
        beta(j) = updated;
        max_delta = std::max(max_delta, std::abs(delta));
      }
    }
    ++sweeps;
    if (objective_per_sweep) {
      double obj =
          (w.y - w.x * beta).squaredNorm() + lambda * beta.lpNorm<1>();
      objective_per_sweep->push_back(obj);
    }
    if (max_delta <= stall_factor * (1.0 + beta.cwiseAbs().maxCoeff())) {
      if (kkt_satisfied(w, beta, lambda, kkt_tol)) break;
      stall_factor = std::max(stall_factor * 0.1, 1e-16);
    }
    if (sweeps >= kMaxSweeps)
      throw ConvergenceError("coordinate descent hit the sweep budget",
                             sweeps);
  }
  return finish(w, std::move(beta), lambda, sweeps);
}

LassoSolution fit_impl(const Mat& x, const Vec& y, double lambda,
                       std::vector<double>* trace) {
  validate(x, y, lambda);
  Workspace w(x, y);
  if (lambda == 0.0) {
    // unpenalized full-rank problems have a closed answer
    try {
      return finish(w, linalg::least_squares(x, y), 0.0, 0);
    } catch (const RankError&) {
      // rank deficient: descent still converges to a minimizer
    }
  }
  return cd_solve(w, lambda, Vec::Zero(x.cols()), trace);
}

}  // namespace

double lambda_max(const Mat& x, const Vec& y) {
  validate(x, y, 0.0);
  return 2.0 * (x.transpose() * y).cwiseAbs().maxCoeff();
}

LassoSolution lasso_fit(const Mat& x, const Vec& y, double lambda) {
  return fit_impl(x, y, lambda, nullptr);
}

LassoSolution lasso_fit_traced(const Mat& x, const Vec& y, double lambda,
                               std::vector<double>& objective_per_sweep) {
  objective_per_sweep.clear();
  return fit_impl(x, y, lambda, &objective_per_sweep);
}

LambdaPath lambda_path(const Mat& x, const Vec& y, std::size_t n_lambda) {
  if (n_lambda < 2) throw ContractError("a penalty path needs at least 2 values");
  double top = lambda_max(x, y);
  LambdaPath path;
  if (top == 0.0) {  // response carries no signal; only lambda = 0 is usable
    path.values = {0.0};
    return path;
  }
  path.values.resize(n_lambda);
  for (std::size_t i = 0; i < n_lambda; ++i) {
    double frac = static_cast<double>(i) / static_cast<double>(n_lambda - 1);
    path.values[i] = top * std::pow(kPathFloor, frac);
  }
  return path;
}

std::vector<LassoSolution> path_fit(const Mat& x, const Vec& y,
                                    const LambdaPath& path, bool warm_start,
                                    std::size_t max_active) {
  if (path.values.empty()) throw ContractError("empty penalty path");
  validate(x, y, 0.0);
  Workspace w(x, y);
  std::vector<LassoSolution> solutions;
  solutions.reserve(path.values.size());
  Vec start = Vec::Zero(x.cols());
  for (double lambda : path.values) {
    if (!(lambda >= 0.0)) throw ContractError("negative penalty in path");
    LassoSolution sol;
    try {
      sol = cd_solve(w, lambda, start, nullptr);
    } catch (const ConvergenceError&) {
      // A small-penalty entry can crawl on near-collinear data. The path
      // exists to propose candidates, so stop at the last solvable penalty;
      // only an unsolvable first entry is a real failure.
      if (solutions.empty()) throw;
      break;
    }
    if (!solutions.empty() && sol.active_count > max_active) break;
    if (warm_start) start = sol.beta;
    solutions.push_back(std::move(sol));
  }
  return solutions;
}

std::size_t bic_choose(const std::vector<LassoSolution>& solutions,
                       std::size_t n, double rss_floor) {
  if (solutions.empty()) throw ContractError("empty candidate list");
  if (n < 2) throw DegenerateInputError("BIC needs at least 2 observations");
  const double dn = static_cast<double>(n);
  std::size_t best = 0;
  double best_bic = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    double rss = std::max(solutions[i].rss, rss_floor);
    double bic = dn * std::log(rss / dn) +
                 static_cast<double>(solutions[i].active_count) * std::log(dn);
    if (bic < best_bic) {  // strict: ties keep the larger penalty
      best_bic = bic;
      best = i;
    }
  }
  return best;
}

std::size_t bic_choose_refit(const Mat& x, const Vec& y,
                             const std::vector<LassoSolution>& solutions,
                             double rss_floor, double coef_penalty) {
  if (solutions.empty()) throw ContractError("empty candidate list");
  const Eigen::Index n = y.size();
  if (n < 2) throw DegenerateInputError("BIC needs at least 2 observations");
  const double dn = static_cast<double>(n);
  std::size_t best = 0;
  double best_bic = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < solutions.size(); ++i) {
    const LassoSolution& sol = solutions[i];
    double rss = y.squaredNorm();
    if (sol.active_count > 0) {
      Mat sub(x.rows(), static_cast<Eigen::Index>(sol.active_count));
      Eigen::Index c = 0;
      for (Eigen::Index j = 0; j < sol.beta.size(); ++j)
        if (sol.beta[j] != 0.0) sub.col(c++) = x.col(j);
      Vec coef = sub.colPivHouseholderQr().solve(y);
      rss = (y - sub * coef).squaredNorm();
    }
    const double bic = dn * std::log(std::max(rss, rss_floor) / dn) +
                       static_cast<double>(sol.active_count) * coef_penalty;
    if (bic < best_bic) {
      best_bic = bic;
      best = i;
    }
  }
  return best;
}

LassoSolution bic_select(const Mat& x, const Vec& y, const LambdaPath& path) {
  std::vector<LassoSolution> solutions = path_fit(x, y, path, true);
  std::size_t best =
      bic_choose(solutions, static_cast<std::size_t>(y.size()),
                 1e-12 * y.squaredNorm());
  return solutions[best];
}

}  // namespace scca::lasso
