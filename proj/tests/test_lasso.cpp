#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "scca/errors.hpp"
#include "scca/lasso.hpp"
#include "scca/linalg.hpp"
#include "scca/rng.hpp"

using namespace scca;

namespace {

Mat random_matrix(Rng& rng, Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Mat centered(const Mat& m) { return linalg::center_columns(m).centered; }

Mat orthonormal_columns(Rng& rng, Index rows, Index cols) {
  Mat raw = random_matrix(rng, rows, cols);
  Eigen::HouseholderQR<Mat> qr(raw);
  return qr.householderQ() * Mat::Identity(rows, cols);
}

double soft(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

bool kkt_holds(const Mat& x, const Vec& y, const lasso::LassoSolution& sol,
               double tol) {
  Vec grad = 2.0 * x.transpose() * (y - x * sol.beta);
  for (Index j = 0; j < sol.beta.size(); ++j) {
    if (sol.beta(j) != 0.0) {
      double sign = sol.beta(j) > 0.0 ? 1.0 : -1.0;
      if (std::abs(grad(j) - sol.lambda * sign) > tol) return false;
    } else if (std::abs(grad(j)) > sol.lambda + tol) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("zero penalty reproduces least squares") {
  Rng rng(21);
  Mat x = centered(random_matrix(rng, 30, 5));
  Vec y = random_matrix(rng, 30, 1);
  auto sol = lasso::lasso_fit(x, y, 0.0);
  Vec ls = linalg::least_squares(x, y);
  CHECK((sol.beta - ls).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(sol.rss == doctest::Approx((y - x * ls).squaredNorm()));
}

TEST_CASE("penalties at or above the critical value produce exact zeros") {
  Rng rng(22);
  Mat x = centered(random_matrix(rng, 25, 4));
  Vec y = random_matrix(rng, 25, 1);
  double top = lasso::lambda_max(x, y);
  for (double lambda : {top, 2.0 * top}) {
    auto sol = lasso::lasso_fit(x, y, lambda);
    CHECK(sol.active_count == 0);
    for (Index j = 0; j < sol.beta.size(); ++j) CHECK(sol.beta(j) == 0.0);
  }
}

TEST_CASE("orthonormal designs reduce to soft thresholding") {
  Rng rng(23);
  for (int rep = 0; rep < 5; ++rep) {
    Mat x = orthonormal_columns(rng, 30, 6);
    Vec y = random_matrix(rng, 30, 1);
    Vec b = x.transpose() * y;
    for (double frac : {0.1, 0.5, 0.9}) {
      double lambda = frac * lasso::lambda_max(x, y);
      auto sol = lasso::lasso_fit(x, y, lambda);
      for (Index j = 0; j < b.size(); ++j)
        CHECK(std::abs(sol.beta(j) - soft(b(j), lambda / 2.0)) <= 1e-8);
    }
  }
}

TEST_CASE("stationarity conditions hold on random problems") {
  Rng rng(24);
  for (int rep = 0; rep < 100; ++rep) {
    Index n = 10 + static_cast<Index>(rng.below(40));
    Index p = 2 + static_cast<Index>(rng.below(12));  // includes p close to n
    Mat x = centered(random_matrix(rng, n, p));
    Vec y = random_matrix(rng, n, 1);
    double lambda = rng.uniform() * lasso::lambda_max(x, y);
    auto sol = lasso::lasso_fit(x, y, lambda);
    CHECK(kkt_holds(x, y, sol, 1e-6 * y.norm()));
  }
}

TEST_CASE("coordinate descent never increases the penalized objective") {
  Rng rng(25);
  Mat x = centered(random_matrix(rng, 40, 8));
  Vec y = random_matrix(rng, 40, 1);
  double lambda = 0.3 * lasso::lambda_max(x, y);
  std::vector<double> objective;
  lasso::lasso_fit_traced(x, y, lambda, objective);
  REQUIRE(!objective.empty());
  for (std::size_t i = 1; i < objective.size(); ++i)
    CHECK(objective[i] <= objective[i - 1] + 1e-9 * (1.0 + objective[0]));
}

TEST_CASE("penalty path endpoints and degenerate response") {
  Rng rng(26);
  Mat x = centered(random_matrix(rng, 20, 3));
  Vec y = random_matrix(rng, 20, 1);
  double top = lasso::lambda_max(x, y);

  auto two = lasso::lambda_path(x, y, 2);
  REQUIRE(two.values.size() == 2);
  CHECK(two.values[0] == doctest::Approx(top));
  CHECK(two.values[1] == doctest::Approx(top * 1e-3));

  auto path = lasso::lambda_path(x, y, 50);
  REQUIRE(path.values.size() == 50);
  for (std::size_t i = 1; i < path.values.size(); ++i)
    CHECK(path.values[i] < path.values[i - 1]);

  auto zero = lasso::lambda_path(x, Vec::Zero(20), 50);
  REQUIRE(zero.values.size() == 1);
  CHECK(zero.values[0] == 0.0);

  CHECK_THROWS_AS(lasso::lambda_path(x, y, 1), ContractError);
}

TEST_CASE("critical penalty of a single-column design") {
  Mat x = Mat::Ones(3, 1);  // x'y = 3 below
  Vec y = Vec::Ones(3);
  CHECK(lasso::lambda_max(x, y) == doctest::Approx(6.0));
}

TEST_CASE("warm and cold path fits agree") {
  Rng rng(27);
  Mat x = centered(random_matrix(rng, 35, 7));
  Vec y = random_matrix(rng, 35, 1);
  auto path = lasso::lambda_path(x, y, 20);
  auto warm = lasso::path_fit(x, y, path, true);
  auto cold = lasso::path_fit(x, y, path, false);
  REQUIRE(warm.size() == cold.size());
  for (std::size_t i = 0; i < warm.size(); ++i)
    CHECK((warm[i].beta - cold[i].beta).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("path fits stop once the active cap is exceeded") {
  Rng rng(28);
  Mat x = centered(random_matrix(rng, 30, 6));
  Vec y = x * Vec::Ones(6) + 0.1 * random_matrix(rng, 30, 1);
  auto path = lasso::lambda_path(x, y, 30);
  auto sols = lasso::path_fit(x, y, path, true, 2);
  REQUIRE(!sols.empty());
  for (std::size_t i = 1; i < sols.size(); ++i)
    CHECK(sols[i].active_count <= 2);
}

TEST_CASE("information criterion selects the empty model for zero response") {
  Rng rng(29);
  Mat x = centered(random_matrix(rng, 20, 4));
  Vec y = Vec::Zero(20);
  auto sol = lasso::bic_select(x, y, lasso::lambda_path(x, y, 10));
  CHECK(sol.active_count == 0);
}

TEST_CASE("information criterion keeps a strong single predictor") {
  Rng rng(30);
  Mat x = centered(random_matrix(rng, 60, 5));
  Vec y = 5.0 * x.col(0) + 0.05 * random_matrix(rng, 60, 1);
  auto sol = lasso::bic_select(x, y, lasso::lambda_path(x, y, 50));
  CHECK(sol.beta(0) != 0.0);
  CHECK(sol.active_count == 1);
}

TEST_CASE("information criterion mostly drops pure noise predictors") {
  int all_zero = 0;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(500 + seed);
    Mat x = centered(random_matrix(rng, 200, 10));
    Vec y = random_matrix(rng, 200, 1);
    auto sol = lasso::bic_select(x, y, lasso::lambda_path(x, y, 50));
    if (sol.active_count == 0) ++all_zero;
  }
  CHECK(all_zero > 50);
}

TEST_CASE("criterion ties resolve toward the larger penalty") {
  // two identical candidates: the first (larger penalty) index must win
  lasso::LassoSolution a, b;
  a.beta = Vec::Zero(2);
  a.lambda = 2.0;
  a.rss = 10.0;
  a.active_count = 0;
  b = a;
  b.lambda = 1.0;
  CHECK(lasso::bic_choose({a, b}, 20, 1e-12) == 0);
}

TEST_CASE("refit scoring keeps strong signals sparse") {
  Rng rng(31);
  Mat x = centered(random_matrix(rng, 50, 8));
  Vec y = 3.0 * x.col(0) - 2.0 * x.col(1) + 0.01 * random_matrix(rng, 50, 1);
  auto path = lasso::lambda_path(x, y, 50);
  auto sols = lasso::path_fit(x, y, path, true);
  double charge = std::log(50.0) + 2.0 * std::log(8.0);
  std::size_t pick =
      lasso::bic_choose_refit(x, y, sols, 1e-12 * y.squaredNorm(), charge);
  CHECK(sols[pick].active_count == 2);
  CHECK(sols[pick].beta(0) != 0.0);
  CHECK(sols[pick].beta(1) != 0.0);
}

TEST_CASE("refit scoring with a multiplicity charge rejects noise") {
  int kept_zero = 0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(900 + seed);
    Mat x = centered(random_matrix(rng, 50, 8));
    Vec y = random_matrix(rng, 50, 1);
    auto sols = lasso::path_fit(x, y, lasso::lambda_path(x, y, 50), true);
    double charge = std::log(50.0) + 2.0 * std::log(8.0);
    std::size_t pick =
        lasso::bic_choose_refit(x, y, sols, 1e-12 * y.squaredNorm(), charge);
    if (sols[pick].active_count == 0) ++kept_zero;
  }
  CHECK(kept_zero >= 15);
}

TEST_CASE("contract violations are rejected") {
  Mat x = Mat::Ones(4, 2);
  Vec y = Vec::Ones(4);
  CHECK_THROWS_AS(lasso::lasso_fit(x, Vec::Ones(3), 1.0), ShapeError);
  CHECK_THROWS_AS(lasso::lasso_fit(x, y, -1.0), ContractError);
  Mat bad = x;
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(lasso::lasso_fit(bad, y, 1.0), ContractError);
  CHECK_THROWS_AS(lasso::path_fit(x, y, lasso::LambdaPath{}, true),
                  ContractError);
  CHECK_THROWS_AS(lasso::bic_choose({}, 10, 1e-12), ContractError);
}
