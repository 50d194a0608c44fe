#include "scca/sar.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "scca/cca.hpp"
#include "scca/errors.hpp"
#include "scca/lasso.hpp"
#include "scca/linalg.hpp"
#include "scca/rng.hpp"

namespace scca::sar {

namespace {

void validate_config(const SarConfig& config) {
  if (!(config.epsilon > 0.0)) throw ContractError("epsilon must be positive");
  if (config.max_iterations < 1)
    throw ContractError("max_iterations must be at least 1");
  if (config.n_lambda < 2)
    throw ContractError("the penalty path needs at least 2 values");
  for (double l : config.lambda_overrides)
    if (!(l >= 0.0)) throw ContractError("negative penalty override");
}

// Least-squares refit on the solution's active set. The lasso is kept as a
// support proposer only: its uniform soft-threshold shrinks small
// coefficients disproportionately, which bends the step direction and can
// trap the alternation in a limit cycle. The refit is the exact fit for the
// chosen support, so fixed points of the alternation are fixed points of
// sparse alternating least squares.
lasso::LassoSolution refit_on_support(const Mat& x, const Vec& y,
                                      lasso::LassoSolution sol) {
  if (sol.active_count == 0) return sol;
  Mat sub(x.rows(), static_cast<Index>(sol.active_count));
  std::vector<Index> cols;
  cols.reserve(sol.active_count);
  for (Index j = 0; j < sol.beta.size(); ++j)
    if (sol.beta[j] != 0.0) {
      sub.col(static_cast<Index>(cols.size())) = x.col(j);
      cols.push_back(j);
    }
  Vec coef = sub.colPivHouseholderQr().solve(y);
  for (std::size_t c = 0; c < cols.size(); ++c) sol.beta[cols[c]] = coef[c];
  sol.rss = (y - sub * coef).squaredNorm();
  return sol;
}

// One regression step of the alternation: a plain lasso fit at a fixed
// penalty when given, otherwise the path proposes candidate supports, BIC
// scores each at its least-squares refit, and the winning support's refit
// is returned. An all-zero BIC pick falls back to the largest path penalty
// that keeps a coefficient; an all-zero fit at a fixed penalty means it
// wiped out the association.
lasso::LassoSolution fit_step(const Mat& x, const Vec& y,
                              const SarConfig& config,
                              const std::optional<double>& lambda) {
  if (lambda) {
    auto sol = lasso::lasso_fit(x, y, *lambda);
    if (sol.active_count == 0)
      throw ZeroAssociationError(
          "no association left at the penalty " +
          std::to_string(*lambda));
    return sol;
  }
  // A spurious perfect sample correlation needs the two active sets to
  // jointly span the observations, i.e. joint size >= n - 1. Capping each
  // side at a quarter of the sample keeps that out of reach for every
  // candidate pair, so the residual always measures real association and
  // the BIC likelihood term cannot collapse by interpolation.
  const std::size_t cap =
      std::max<std::size_t>(static_cast<std::size_t>(x.rows()) / 4, 1);
  auto path = lasso::lambda_path(x, y, config.n_lambda);
  auto solutions = lasso::path_fit(x, y, path, true, cap);
  // Each kept coordinate pays log n plus a multiplicity charge 2 log p for
  // the dictionary it was searched over (the wide-design extension of the
  // criterion). Under the plain log n charge a noise coordinate clears the
  // bar whenever its chance partial correlation exceeds sqrt(log n / n),
  // which at these sample sizes happens in a few percent of regressions and
  // compounds across iterations, pairs, and re-expressions.
  const double dn = static_cast<double>(y.size());
  const double coef_penalty =
      std::log(dn) + 2.0 * std::log(static_cast<double>(x.cols()));
  std::size_t best = lasso::bic_choose_refit(
      x, y, solutions, 1e-12 * y.squaredNorm(), coef_penalty);
  if (solutions[best].active_count == 0) {
    best = solutions.size();
    for (std::size_t i = 0; i < solutions.size(); ++i)
      if (solutions[i].active_count > 0) {  // path descends: first = largest
        best = i;
        break;
      }
    if (best == solutions.size())
      throw ZeroAssociationError(
          "response carries no association at any penalty");
  }
  return refit_on_support(x, y, solutions[best]);
}

double unit_normalize(Vec& v, const char* what) {
  double norm = v.norm();
  if (norm < 1e-10)
    throw ZeroAssociationError(std::string(what) + " collapsed to zero");
  v /= norm;
  return norm;
}

void check_variate(const Vec& v, const char* what) {
  if (v.norm() < 1e-10)
    throw ZeroAssociationError(std::string(what) +
                               " has near-zero norm; no signal remains");
}

// leading right singular vector of the cross-covariance of the current
// (deflated) data; the initialization used when the ridge route is off or
// failed
Vec fallback_init(const Mat& xd, const Mat& yd) {
  Mat sxy = linalg::sample_covariance(xd, yd);
  Eigen::JacobiSVD<Mat> svd(sxy, Eigen::ComputeThinV);
  Vec b = svd.matrixV().col(0);
  Index imax = 0;
  b.cwiseAbs().maxCoeff(&imax);
  if (b(imax) < 0.0) b = -b;
  return b;
}

double correlation(const Vec& u, const Vec& v) {
  Vec uc = u.array() - u.mean();
  Vec vc = v.array() - v.mean();
  double denom = uc.norm() * vc.norm();
  if (denom == 0.0) return 0.0;
  return uc.dot(vc) / denom;
}

// Unit vectors on the y-side coordinates with the strongest single
// cross-correlations, strongest first, one per distinct coordinate: cheap
// starts already inside sparse basins. Columns that deflation annihilated
// (norm collapsed to rounding dust) are skipped, because correlations of
// dust are meaningless and can be large by fluke.
std::vector<Vec> marginal_inits(const Mat& xd, const Mat& yd,
                                std::size_t count) {
  const double x_floor = 1e-8 * xd.colwise().norm().maxCoeff();
  const double y_floor = 1e-8 * yd.colwise().norm().maxCoeff();
  std::vector<std::pair<double, Index>> strength;  // best |corr| per y column
  for (Index j = 0; j < yd.cols(); ++j) {
    if (yd.col(j).norm() < y_floor) continue;
    double top = -1.0;
    for (Index i = 0; i < xd.cols(); ++i) {
      if (xd.col(i).norm() < x_floor) continue;
      top = std::max(top, std::abs(correlation(xd.col(i), yd.col(j))));
    }
    if (top >= 0.0) strength.emplace_back(top, j);
  }
  std::sort(strength.begin(), strength.end(),
            [](const auto& l, const auto& r) {
              return l.first > r.first || (l.first == r.first && l.second < r.second);
            });
  std::vector<Vec> inits;
  for (std::size_t s = 0; s < strength.size() && s < count; ++s) {
    Vec b = Vec::Zero(yd.cols());
    b(strength[s].second) = 1.0;
    inits.push_back(std::move(b));
  }
  return inits;
}

Mat take_rows(const Mat& m, const std::vector<std::size_t>& order,
              std::size_t from, std::size_t to,
              const std::vector<Index>& cols) {
  Mat out(static_cast<Index>(to - from), static_cast<Index>(cols.size()));
  for (std::size_t r = from; r < to; ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Index>(r - from), static_cast<Index>(c)) =
          m(static_cast<Index>(order[r]), cols[c]);
  return out;
}

std::vector<Index> support_of(const Vec& v) {
  std::vector<Index> idx;
  for (Index j = 0; j < v.size(); ++j)
    if (v[j] != 0.0) idx.push_back(j);
  return idx;
}

// One half-split replication measurement: refit the candidate supports on
// rows [from, to) of the permuted order and return the canonical correlation
// the refit attains on the complementary half.
double half_replication(const Mat& xd, const Mat& yd,
                        const std::vector<Index>& sa,
                        const std::vector<Index>& sb,
                        const std::vector<std::size_t>& order,
                        std::size_t cut, bool first_half_fits) {
  const auto n = static_cast<std::size_t>(xd.rows());
  std::size_t f0 = first_half_fits ? 0 : cut;
  std::size_t f1 = first_half_fits ? cut : n;
  std::size_t e0 = first_half_fits ? cut : 0;
  std::size_t e1 = first_half_fits ? n : cut;
  Mat xa = linalg::center_columns(take_rows(xd, order, f0, f1, sa)).centered;
  Mat yb = linalg::center_columns(take_rows(yd, order, f0, f1, sb)).centered;
  // the tiny ridge keeps the within-set covariances invertible when a
  // support is large relative to the half sample
  cca::CcaModel refit = cca::canonical_ridge(xa, yb, {1e-6, 1e-6}, 1);
  Mat xa2 = linalg::center_columns(take_rows(xd, order, e0, e1, sa)).centered;
  Mat yb2 = linalg::center_columns(take_rows(yd, order, e0, e1, sb)).centered;
  Vec u2 = xa2 * refit.a.col(0);
  Vec v2 = yb2 * refit.b.col(0);
  return std::abs(correlation(u2, v2));
}

// In-sample fit cannot arbitrate between converged candidates: a chance
// alignment of noise coordinates and a true association can post the same
// correlation, and the chance one is often sparser as well. Chance does not
// replicate, so refit each candidate's support on one half of the rows and
// score it by the canonical correlation the refit attains on the other half.
// A single split is itself noisy at these sample sizes, so the score
// averages both orientations of several seeded splits.
double replication_score(const Mat& xd, const Mat& yd, const PairFit& fit,
                         const std::vector<std::vector<std::size_t>>& splits) {
  const auto n = static_cast<std::size_t>(xd.rows());
  const std::size_t half = n / 2;
  if (half < 4 || splits.empty())
    return std::abs(correlation(fit.u, fit.v));
  std::vector<Index> sa = support_of(fit.a);
  std::vector<Index> sb = support_of(fit.b);
  if (sa.empty() || sb.empty()) return -1.0;
  double acc = 0.0;
  std::size_t measured = 0;
  for (const auto& order : splits) {
    for (bool first : {true, false}) {
      try {
        acc += half_replication(xd, yd, sa, sb, order, half, first);
        ++measured;
      } catch (const Error&) {
        // a degenerate half contributes nothing
      }
    }
  }
  return measured ? acc / static_cast<double>(measured) : -1.0;
}

PairFit run_inner(const Mat& xd, const Mat& yd, const Vec& b_init,
                  const SarConfig& config,
                  const std::optional<double>& fixed) {
  validate_config(config);
  if (xd.rows() != yd.rows()) throw ShapeError("data sets differ in rows");
  if (b_init.size() != yd.cols())
    throw ShapeError("initial vector length does not match the y-side columns");

  Vec b = b_init;
  unit_normalize(b, "initial vector");
  Vec v = yd * b;
  check_variate(v, "initial y-side variate");

  PairFit fit;
  Vec a_prev, b_prev;
  for (std::size_t s = 1; s <= config.max_iterations; ++s) {
    auto sol_a = fit_step(xd, v, config, fixed);
    Vec a = sol_a.beta;
    unit_normalize(a, "x-side vector");
    Vec u = xd * a;
    check_variate(u, "x-side variate");

    auto sol_b = fit_step(yd, u, config, fixed);
    b = sol_b.beta;
    unit_normalize(b, "y-side vector");
    v = yd * b;
    check_variate(v, "y-side variate");

    fit.iterations = s;
    fit.lambda_a = sol_a.lambda;
    fit.lambda_b = sol_b.lambda;
    if (s >= 2) {
      double angle_a = linalg::vector_angle(a_prev, a);
      double angle_b = linalg::vector_angle(b_prev, b);
      fit.trace.angle_a.push_back(angle_a);
      fit.trace.angle_b.push_back(angle_b);
      if (angle_a < config.epsilon && angle_b < config.epsilon) {
        fit.converged = true;
        fit.a = a;
        fit.b = b;
        fit.u = u;
        fit.v = v;
        return fit;
      }
    }
    a_prev = a;
    b_prev = b;
    fit.a = std::move(a);
    fit.b = b;
    fit.u = std::move(u);
    fit.v = v;
  }
  return fit;  // hit the iteration budget; caller sees converged == false
}

}  // namespace

bool convergence_check(const Vec& a_prev, const Vec& a_cur, const Vec& b_prev,
                       const Vec& b_cur, double epsilon) {
  return linalg::vector_angle(a_prev, a_cur) < epsilon &&
         linalg::vector_angle(b_prev, b_cur) < epsilon;
}

Mat deflate(const Mat& m, const Vec& w) {
  if (w.size() != m.rows())
    throw ShapeError("variate length does not match the matrix rows");
  double wsq = w.squaredNorm();
  if (wsq < 1e-12)
    throw DegenerateInputError("cannot deflate by a near-zero variate");
  return m - w * (w.transpose() * m) / wsq;
}

Expressed express_in_original(const Vec& target, const Vec& base_coeffs,
                              const Mat& prev_variates, const Mat& x0,
                              const SarConfig& config,
                              std::optional<double> lambda_override) {
  if (prev_variates.cols() == 0) {
    // first pair: the converged coefficients already live on the original data
    return {base_coeffs, lambda_override.value_or(0.0)};
  }
  if (prev_variates.rows() != target.size() || x0.rows() != target.size())
    throw ShapeError("variate length mismatch in re-expression");
  Vec gamma = linalg::least_squares(prev_variates, target);
  Vec residual = target - prev_variates * gamma;
  auto sol = fit_step(x0, residual, config, lambda_override);
  return {sol.beta, sol.lambda};
}

PairFit sar_pair_inner(const Mat& xd, const Mat& yd, const Vec& b_init,
                       const SarConfig& config,
                       std::optional<double> lambda_override) {
  return run_inner(xd, yd, b_init, config, lambda_override);
}

SarModel sar_fit(const Mat& x, const Mat& y, const SarConfig& config) {
  validate_config(config);
  if (x.rows() != y.rows())
    throw ShapeError("data sets have " + std::to_string(x.rows()) + " vs " +
                     std::to_string(y.rows()) + " rows");
  if (x.rows() < 3) throw DegenerateInputError("need at least 3 observations");
  const Index p = x.cols();
  const Index q = y.cols();
  const Index n = x.rows();
  const auto pair_cap = static_cast<std::size_t>(std::min(p, q));
  if (config.rank && (*config.rank < 1 || *config.rank > pair_cap))
    throw ContractError("rank must lie in 1.." + std::to_string(pair_cap));

  Mat x0 = linalg::center_columns(x).centered;
  Mat y0 = linalg::center_columns(y).centered;

  // ridge fit on the original data: starting vectors, and the spectrum the
  // automatic rank choice reads
  const auto rmax = static_cast<std::size_t>(
      std::min({p, q, n - 1}));
  std::size_t ridge_rank = config.rank ? std::max(*config.rank, std::size_t{1})
                                       : rmax;
  ridge_rank = std::min(ridge_rank, pair_cap);
  cca::CcaModel ridge;
  bool have_ridge = false;
  cca::RidgeParams cv_params;
  if (config.ridge_init) {
    try {
      cv_params = cca::ridge_cv(x0, y0, cca::default_ridge_grid(),
                                cca::default_ridge_grid(), 5, config.seed);
      ridge = cca::canonical_ridge(x0, y0, cv_params, ridge_rank);
      have_ridge = true;
    } catch (const Error&) {
      have_ridge = false;  // fall back to the cross-covariance start
    }
  }
  std::size_t rank;
  if (config.rank) {
    rank = *config.rank;
  } else if (rmax < 2) {
    rank = 1;
  } else if (have_ridge) {
    rank = cca::select_rank(ridge.rho).rank;
  } else {
    Eigen::JacobiSVD<Mat> svd(linalg::sample_covariance(x0, y0));
    Vec spectrum = svd.singularValues().head(static_cast<Index>(rmax));
    rank = cca::select_rank(spectrum).rank;
  }

  SarModel model;
  model.a_sparse.resize(p, static_cast<Index>(rank));
  model.b_sparse.resize(q, static_cast<Index>(rank));
  model.variates_u.resize(n, static_cast<Index>(rank));
  model.variates_v.resize(n, static_cast<Index>(rank));
  model.rho_hat.resize(static_cast<Index>(rank));

  Mat xd = x0;
  Mat yd = y0;
  for (std::size_t l = 0; l < rank; ++l) {
    std::optional<double> fixed;
    if (!config.lambda_overrides.empty())
      fixed = config.lambda_overrides[std::min(l, config.lambda_overrides.size() - 1)];

    // The alternation has one fixed point per sparse local optimum, and a
    // poor start converges to the wrong one. Run it from each deterministic
    // starting vector and keep the candidate with the best averaged
    // split-half replication score; ties go to the sparser candidate, then
    // to the earlier start (the ridge column first, matching the plain
    // algorithm).
    std::vector<Vec> starts;
    if (have_ridge) starts.push_back(ridge.b.col(static_cast<Index>(l)));
    if (!fixed) {
      for (Vec& init : marginal_inits(xd, yd, 3))
        starts.push_back(std::move(init));
      starts.push_back(fallback_init(xd, yd));
    } else if (starts.empty()) {
      starts.push_back(fallback_init(xd, yd));
    }

    std::vector<std::vector<std::size_t>> splits;
    if (!fixed && starts.size() > 1) {
      Rng split_rng(config.seed ^
                    (0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(l + 1)));
      for (int s = 0; s < 8; ++s)
        splits.push_back(split_rng.permutation(static_cast<std::size_t>(n)));
    }

    PairFit pair;
    bool have_pair = false;
    double best_score = -std::numeric_limits<double>::infinity();
    Index best_active = 0;
    std::exception_ptr last_error;
    for (const Vec& start : starts) {
      try {
        PairFit candidate = run_inner(xd, yd, start, config, fixed);
        double score =
            splits.empty()
                ? std::abs(correlation(candidate.u, candidate.v))
                : replication_score(xd, yd, candidate, splits);
        Index active = static_cast<Index>(
            (candidate.a.array() != 0.0).count() +
            (candidate.b.array() != 0.0).count());
        bool better =
            score > best_score ||
            (score == best_score && have_pair && active < best_active);
        if (!have_pair || better) {
          best_score = score;
          best_active = active;
          pair = std::move(candidate);
          have_pair = true;
        }
      } catch (const ConvergenceError&) {
        last_error = std::current_exception();
      } catch (const ZeroAssociationError&) {
        last_error = std::current_exception();
      }
    }
    if (!have_pair) std::rethrow_exception(last_error);

    Mat prev_u = model.variates_u.leftCols(static_cast<Index>(l));
    Mat prev_v = model.variates_v.leftCols(static_cast<Index>(l));
    Expressed ea = express_in_original(pair.u, pair.a, prev_u, x0, config, fixed);
    Expressed eb = express_in_original(pair.v, pair.b, prev_v, y0, config, fixed);

    Vec u_final = x0 * ea.coeffs;
    Vec v_final = y0 * eb.coeffs;
    check_variate(u_final, "re-expressed x-side variate");
    check_variate(v_final, "re-expressed y-side variate");

    model.a_sparse.col(static_cast<Index>(l)) = ea.coeffs;
    model.b_sparse.col(static_cast<Index>(l)) = eb.coeffs;
    model.variates_u.col(static_cast<Index>(l)) = u_final;
    model.variates_v.col(static_cast<Index>(l)) = v_final;
    model.rho_hat(static_cast<Index>(l)) = correlation(u_final, v_final);

    PairSummary summary;
    summary.iterations = pair.iterations;
    summary.converged = pair.converged;
    if (l == 0) {
      summary.lambda_a = pair.lambda_a;
      summary.lambda_b = pair.lambda_b;
    } else {
      summary.lambda_a = ea.lambda;
      summary.lambda_b = eb.lambda;
    }
    model.pairs.push_back(summary);

    if (l + 1 < rank) {
      xd = deflate(xd, u_final);
      yd = deflate(yd, v_final);
    }
  }
  return model;
}

}  // namespace scca::sar
