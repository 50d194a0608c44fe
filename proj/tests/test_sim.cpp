#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

#include "scca/campaign.hpp"
#include "scca/designs.hpp"
#include "scca/errors.hpp"
#include "scca/linalg.hpp"
#include "scca/metrics.hpp"
#include "scca/rng.hpp"
#include "scca/sar.hpp"

using namespace scca;

TEST_CASE("all designs expose positive definite covariances and fixed shapes") {
  struct Expected {
    const char* name;
    std::size_t n, p, q;
  };
  for (Expected e : {Expected{"uncorrelated", 50, 4, 6},
                     Expected{"correlated", 50, 6, 10},
                     Expected{"high_dimensional", 50, 25, 40},
                     Expected{"overparametrized", 80, 60, 85}}) {
    auto spec = sim::build_design(e.name);
    CHECK(spec.name == e.name);
    CHECK(spec.n == e.n);
    CHECK(spec.p == e.p);
    CHECK(spec.q == e.q);
    CHECK(spec.true_rank == 2);
    CHECK(spec.sigma.rows() == static_cast<Index>(e.p + e.q));
    CHECK_NOTHROW(linalg::cholesky(spec.sigma));
  }
}

TEST_CASE("the uncorrelated design carries a diagonal cross block") {
  auto spec = sim::build_design("uncorrelated");
  CHECK(spec.sigma(0, 4) == 0.6);
  CHECK(spec.sigma(1, 5) == 0.5);
  double off = 0.0;
  for (Index i = 0; i < 4; ++i)
    for (Index j = 4; j < 10; ++j)
      if (!((i == 0 && j == 4) || (i == 1 && j == 5)))
        off = std::max(off, std::abs(spec.sigma(i, j)));
  CHECK(off == 0.0);
  // identity within-set blocks
  CHECK((spec.sigma.topLeftCorner(4, 4) - Mat::Identity(4, 4))
            .cwiseAbs()
            .maxCoeff() == 0.0);
  CHECK((spec.sigma.bottomRightCorner(6, 6) - Mat::Identity(6, 6))
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("the correlated design has an autoregressive leading y block") {
  auto spec = sim::build_design("correlated");
  const Index p = 6;
  CHECK(spec.sigma(p, p + 1) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(spec.sigma(p, p + 2) == doctest::Approx(0.49).epsilon(1e-15));
  CHECK(spec.sigma(p + 1, p + 2) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(spec.sigma(p + 3, p + 4) == 0.0);  // identity past the block
  CHECK(spec.sigma(0, p) == 0.5);
  CHECK(spec.sigma(1, p + 1) == 0.5);
  CHECK(spec.sigma(2, p + 2) == 0.0);
}

TEST_CASE("unknown design names list the valid ones") {
  try {
    sim::build_design("nope");
    FAIL("expected a throw");
  } catch (const ContractError& e) {
    CHECK(std::string(e.what()).find("uncorrelated") != std::string::npos);
  }
}

TEST_CASE("sampling is seed-deterministic with the documented shapes") {
  auto spec = sim::build_design("correlated");
  Rng a(77), b(77), c(78);
  auto d1 = sim::sample_dataset(spec, a);
  auto d2 = sim::sample_dataset(spec, b);
  auto d3 = sim::sample_dataset(spec, c);
  CHECK(d1.x.rows() == 50);
  CHECK(d1.x.cols() == 6);
  CHECK(d1.y.cols() == 10);
  CHECK((d1.x - d2.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1.y - d2.y).cwiseAbs().maxCoeff() == 0.0);
  CHECK((d1.x - d3.x).cwiseAbs().maxCoeff() > 0.0);
  for (Index j = 0; j < d1.x.cols(); ++j) {
    Vec col = d1.x.col(j);
    CHECK((col.array() - col.mean()).abs().maxCoeff() > 0.0);
  }
}

TEST_CASE("large samples reproduce the design covariance") {
  auto spec = sim::build_design("uncorrelated");
  spec.n = 100000;
  Rng rng(500);
  auto data = sim::sample_dataset(spec, rng);
  Mat joint(data.x.rows(), 10);
  joint << data.x, data.y;
  Mat centered = linalg::center_columns(joint).centered;
  Mat s = linalg::sample_covariance(centered, centered);
  CHECK((s - spec.sigma).cwiseAbs().maxCoeff() < 0.03);
}

TEST_CASE("true canonical vectors of the uncorrelated design are the axes") {
  auto spec = sim::build_design("uncorrelated");
  auto truth = sim::true_canonical_vectors(spec);
  CHECK(std::abs(truth.rho(0) - 0.6) <= 1e-10);
  CHECK(std::abs(truth.rho(1) - 0.5) <= 1e-10);
  CHECK(std::abs(truth.a(0, 0) - 1.0) <= 1e-10);
  CHECK(std::abs(truth.a(1, 1) - 1.0) <= 1e-10);
  CHECK(std::abs(truth.b(0, 0) - 1.0) <= 1e-10);
  CHECK(std::abs(truth.b(1, 1) - 1.0) <= 1e-10);
  CHECK(truth.a.cwiseAbs().sum() == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("true y-side vectors stay on the leading block for every design") {
  for (const char* name : {"correlated", "high_dimensional", "overparametrized"}) {
    auto spec = sim::build_design(name);
    auto truth = sim::true_canonical_vectors(spec);
    CHECK(truth.rho(0) >= truth.rho(1) - 1e-12);
    CHECK(truth.rho(1) > 0.0);
    for (Index i = 3; i < truth.b.rows(); ++i)
      for (Index j = 0; j < truth.b.cols(); ++j)
        CHECK(std::abs(truth.b(i, j)) <= 1e-10);
  }
}

TEST_CASE("support recovery rates count hits and correct zeros") {
  Mat truth(2, 2), estimate(2, 2);
  truth << 1.0, 0.0, 0.0, 0.5;
  estimate << 0.8, 0.2, 0.0, 0.0;
  auto rates = sim::sparsity_metrics(estimate, truth);
  CHECK(rates.tpr == 0.5);
  CHECK(rates.tnr == 0.5);
  CHECK_FALSE(rates.no_true_zeros);

  auto perfect = sim::sparsity_metrics(truth, truth);
  CHECK(perfect.tpr == 1.0);
  CHECK(perfect.tnr == 1.0);
}

TEST_CASE("tiny truth entries count as zeros, exact zeros as estimates") {
  Mat truth(2, 1), estimate(2, 1);
  truth << 1.0, 1e-11;  // below the eigensolver noise floor
  estimate << 1.0, 1e-300;
  auto rates = sim::sparsity_metrics(estimate, truth);
  CHECK(rates.tpr == 1.0);
  CHECK(rates.tnr == 0.0);  // any nonzero estimate misses a true zero
}

TEST_CASE("a dense truth flags the true negative rate as meaningless") {
  Mat truth(2, 1), estimate(2, 1);
  truth << 1.0, 2.0;
  estimate << 1.0, 0.0;
  auto rates = sim::sparsity_metrics(estimate, truth);
  CHECK(rates.no_true_zeros);
  CHECK(rates.tnr == 1.0);
  CHECK(rates.tpr == 0.5);
}

TEST_CASE("support recovery rejects shape mismatches") {
  CHECK_THROWS_AS(sim::sparsity_metrics(Mat::Zero(2, 1), Mat::Zero(3, 1)),
                  ShapeError);
}

TEST_CASE("the paired test matches a hand-checked example") {
  std::vector<double> first{1.1, 2.3, 0.7, 1.9, 1.2, 0.8};
  std::vector<double> second{0.9, 2.0, 0.8, 1.4, 1.1, 0.5};
  auto t = sim::paired_t_test(first, second);
  CHECK(t.dof == 5);
  CHECK(t.statistic == doctest::Approx(2.5999999999999996).epsilon(1e-12));
  CHECK(t.p_value == doctest::Approx(0.048249453069580089).epsilon(1e-12));
}

TEST_CASE("degenerate paired samples resolve without dividing by zero") {
  std::vector<double> a{1.0, 2.0, 3.0};
  auto same = sim::paired_t_test(a, a);
  CHECK(same.statistic == 0.0);
  CHECK(same.p_value == 1.0);
  std::vector<double> shifted{2.0, 3.0, 4.0};
  auto constant = sim::paired_t_test(shifted, a);
  CHECK(std::isinf(constant.statistic));
  CHECK(constant.statistic > 0.0);
  CHECK(constant.p_value == 0.0);
}

TEST_CASE("the paired test validates its inputs") {
  std::vector<double> a{1.0, 2.0}, b{1.0};
  CHECK_THROWS_AS(sim::paired_t_test(a, b), ShapeError);
  std::vector<double> one{1.0};
  CHECK_THROWS_AS(sim::paired_t_test(one, one), DegenerateInputError);
}

TEST_CASE("tail probabilities match reference values") {
  CHECK(sim::student_t_two_sided_p(2.0, 10) ==
        doctest::Approx(0.073388034770740393).epsilon(1e-12));
  CHECK(sim::student_t_two_sided_p(0.5, 3) ==
        doctest::Approx(0.65144796484815104).epsilon(1e-12));
  CHECK(sim::student_t_two_sided_p(4.2, 25) ==
        doctest::Approx(0.00029600389893005646).epsilon(1e-12));
  CHECK(sim::student_t_two_sided_p(1.0, 1) ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(sim::student_t_two_sided_p(3.321, 99) ==
        doctest::Approx(0.0012570103618373323).epsilon(1e-12));
  CHECK(sim::student_t_two_sided_p(0.0, 7) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sim::student_t_two_sided_p(-2.0, 10) ==
        doctest::Approx(sim::student_t_two_sided_p(2.0, 10)).epsilon(1e-14));
  CHECK_THROWS_AS(sim::student_t_two_sided_p(1.0, 0), ContractError);
}

TEST_CASE("the generator is a standard mt19937_64 stream") {
  Rng rng(5489);  // the engine's default seed
  std::uint64_t last = 0;
  for (int i = 0; i < 10000; ++i) last = rng.next_u64();
  CHECK(last == 9981545732273789042ull);  // value fixed by the C++ standard
}

TEST_CASE("uniform draws live in the unit interval with the right mean") {
  Rng rng(91);
  double sum = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  CHECK(sum / 10000 == doctest::Approx(0.5).epsilon(0).scale(0.02));
}

TEST_CASE("normal draws have standard moments") {
  Rng rng(92);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  double mean = sum / n;
  CHECK(std::abs(mean) < 0.02);
  CHECK(sq / n - mean * mean == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("permutations are complete and seed-deterministic") {
  auto p1 = Rng(13).permutation(40);
  auto p2 = Rng(13).permutation(40);
  CHECK(p1 == p2);
  auto sorted = p1;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expect(40);
  std::iota(expect.begin(), expect.end(), 0u);
  CHECK(sorted == expect);
  CHECK(Rng(5).permutation(0).empty());
  Rng rng(6);
  for (int i = 0; i < 100; ++i) CHECK(rng.below(1) == 0);
  for (int i = 0; i < 100; ++i) CHECK(rng.below(7) < 7);
}

TEST_CASE("a one-run campaign equals a by-hand fit of the same draw") {
  auto spec = sim::build_design("uncorrelated");
  const std::uint64_t seed = 2024;
  auto report = sim::run_campaign(spec, {sim::Method::Sar}, 1, seed);
  REQUIRE(report.methods.size() == 1);
  const auto& mr = report.methods[0];
  CHECK(mr.attempted == 1);
  CHECK(mr.failed == 0);
  REQUIRE(mr.runs.size() == 1);
  CHECK(mr.runs[0].run == 1);
  CHECK(mr.runs[0].ok);

  std::uint64_t run_seed = seed ^ 1ull;
  Rng rng(run_seed);
  auto data = sim::sample_dataset(spec, rng);
  sar::SarConfig config;
  config.rank = 2;
  config.seed = run_seed;
  auto model = sar::sar_fit(data.x, data.y, config);
  auto truth = sim::true_canonical_vectors(spec);
  double angle_a = linalg::principal_subspace_angle(model.a_sparse, truth.a);
  double angle_b = linalg::principal_subspace_angle(model.b_sparse, truth.b);
  CHECK(std::abs(mr.runs[0].angle_a - angle_a) <= 1e-15);
  CHECK(std::abs(mr.runs[0].angle_b - angle_b) <= 1e-15);
  CHECK(mr.mean_angle_a == mr.runs[0].angle_a);
  CHECK(mr.mean_tnr_a == mr.runs[0].tnr_a);
}

TEST_CASE("means re-aggregate from the per-run records") {
  auto spec = sim::build_design("uncorrelated");
  auto report = sim::run_campaign(spec, {sim::Method::Cca}, 5, 31);
  const auto& mr = report.methods[0];
  REQUIRE(mr.runs.size() == 5);
  double sum = 0.0;
  for (const auto& run : mr.runs) {
    CHECK(run.ok);
    sum += run.angle_a;
  }
  CHECK(mr.mean_angle_a == doctest::Approx(sum / 5).epsilon(0).scale(1e-12));
}

TEST_CASE("classical analysis is marked infeasible when y has too many columns") {
  auto spec = sim::build_design("overparametrized");
  auto report = sim::run_campaign(spec, {sim::Method::Cca}, 3, 1);
  const auto& mr = report.methods[0];
  CHECK_FALSE(mr.feasible);
  CHECK(mr.attempted == 0);
  CHECK(mr.runs.empty());
}

TEST_CASE("comparison methods carry a paired test against the sparse fit") {
  auto spec = sim::build_design("uncorrelated");
  auto report =
      sim::run_campaign(spec, {sim::Method::Sar, sim::Method::Cca}, 3, 77);
  REQUIRE(report.methods.size() == 2);
  CHECK_FALSE(report.methods[0].has_t_test);
  CHECK(report.methods[1].has_t_test);
  CHECK(report.methods[1].t_test_angle_a.dof == 2);
}

TEST_CASE("campaigns reject empty method lists and zero runs") {
  auto spec = sim::build_design("uncorrelated");
  CHECK_THROWS_AS(sim::run_campaign(spec, {}, 1, 1), ContractError);
  CHECK_THROWS_AS(sim::run_campaign(spec, {sim::Method::Sar}, 0, 1),
                  ContractError);
}

TEST_CASE("method names round-trip and reject unknowns") {
  for (auto m : {sim::Method::Sar, sim::Method::Ridge, sim::Method::Cca})
    CHECK(sim::method_from_string(sim::method_name(m)) == m);
  CHECK_THROWS_AS(sim::method_from_string("pls"), ContractError);
}

TEST_CASE("leave-one-out error vanishes when the two sets are identical") {
  Rng rng(555);
  Mat x(12, 2);
  for (Index j = 0; j < 2; ++j)
    for (Index i = 0; i < 12; ++i) x(i, j) = rng.normal();
  Mat y = x;
  sar::SarConfig config;
  config.rank = 1;
  config.lambda_overrides = {0.0};
  config.epsilon = 1e-10;
  CHECK(sim::loo_cv_score(x, y, sim::Method::Sar, config) <= 1e-6);
}

TEST_CASE("leave-one-out scoring does not depend on the row order") {
  Rng rng(555);
  Mat x(12, 2);
  for (Index j = 0; j < 2; ++j)
    for (Index i = 0; i < 12; ++i) x(i, j) = rng.normal();
  Mat y = x;
  sar::SarConfig config;
  config.rank = 1;
  config.lambda_overrides = {0.0};
  config.epsilon = 1e-10;
  double base = sim::loo_cv_score(x, y, sim::Method::Sar, config);
  auto perm = Rng(9).permutation(12);
  Mat xp(12, 2), yp(12, 2);
  for (int i = 0; i < 12; ++i) {
    xp.row(i) = x.row(static_cast<Index>(perm[i]));
    yp.row(i) = y.row(static_cast<Index>(perm[i]));
  }
  double permuted = sim::loo_cv_score(xp, yp, sim::Method::Sar, config);
  CHECK(std::abs(base - permuted) <= 1e-10);
}

TEST_CASE("a fold that cannot be fit names itself in the error") {
  Rng rng(556);
  Mat x(10, 3), y(10, 12);  // classical analysis is singular on every fold
  for (Index j = 0; j < 3; ++j)
    for (Index i = 0; i < 10; ++i) x(i, j) = rng.normal();
  for (Index j = 0; j < 12; ++j)
    for (Index i = 0; i < 10; ++i) y(i, j) = rng.normal();
  sar::SarConfig config;
  config.rank = 1;
  try {
    sim::loo_cv_score(x, y, sim::Method::Cca, config);
    FAIL("expected a throw");
  } catch (const FoldFitError& e) {
    CHECK(std::string(e.what()).find("fold") != std::string::npos);
  }
}

TEST_CASE("the report serializes to a stable schema without timing data") {
  auto spec = sim::build_design("uncorrelated");
  auto report =
      sim::run_campaign(spec, {sim::Method::Sar, sim::Method::Cca}, 2, 99);
  std::string text = sim::report_to_json(report);
  CHECK(text.find("wall") == std::string::npos);

  auto doc = nlohmann::json::parse(text);
  CHECK(doc["schema_version"] == 1);
  CHECK(doc["design"] == "uncorrelated");
  CHECK(doc["runs"] == 2);
  CHECK(doc["seed"] == 99);
  REQUIRE(doc["methods"].size() == 2);
  const auto& sar_m = doc["methods"][0];
  CHECK(sar_m["method"] == "sar");
  CHECK(sar_m["feasible"] == true);
  CHECK(sar_m["attempted"] == 2);
  CHECK(sar_m["t_test_vs_sar"].is_null());
  REQUIRE(sar_m["per_run"].size() == 2);
  CHECK(sar_m["per_run"][0]["run"] == 1);
  CHECK(sar_m["per_run"][0].contains("angle_a"));
  CHECK(sar_m["per_run"][0].contains("tnr_b"));
  const auto& cca_m = doc["methods"][1];
  CHECK(cca_m["t_test_vs_sar"].contains("angle_a"));
  CHECK(cca_m["t_test_vs_sar"]["angle_a"].contains("p_value"));
}

TEST_CASE("equal campaigns serialize to identical bytes") {
  auto spec = sim::build_design("uncorrelated");
  auto r1 = sim::run_campaign(spec, {sim::Method::Sar, sim::Method::Cca}, 2, 7);
  auto r2 = sim::run_campaign(spec, {sim::Method::Sar, sim::Method::Cca}, 2, 7);
  CHECK(sim::report_to_json(r1) == sim::report_to_json(r2));
  CHECK(sim::report_to_csv(r1) == sim::report_to_csv(r2));
}

TEST_CASE("the long-form table has one header and four fields per row") {
  auto spec = sim::build_design("uncorrelated");
  auto report =
      sim::run_campaign(spec, {sim::Method::Sar, sim::Method::Cca}, 2, 15);
  std::string text = sim::report_to_csv(report);
  std::istringstream lines(text);
  std::string line;
  REQUIRE(std::getline(lines, line));
  CHECK(line == "design,method,metric,value");
  std::size_t rows = 0;
  bool saw_mean = false, saw_t = false;
  while (std::getline(lines, line)) {
    CHECK(std::count(line.begin(), line.end(), ',') == 3);
    CHECK(line.rfind("uncorrelated,", 0) == 0);
    saw_mean = saw_mean || line.find(",mean_angle_a,") != std::string::npos;
    saw_t = saw_t || line.find(",t_p_value_angle_b,") != std::string::npos;
    ++rows;
  }
  // 9 aggregate rows per method plus 4 test rows for the comparison method
  CHECK(rows == 9 + 9 + 4);
  CHECK(saw_mean);
  CHECK(saw_t);
}
