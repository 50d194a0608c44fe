#include "scca/campaign.hpp"

#include <chrono>
#include <string>

#include "json.hpp"
#include "scca/cca.hpp"
#include "scca/csv.hpp"
#include "scca/errors.hpp"
#include "scca/linalg.hpp"

namespace scca::sim {

namespace {

using ordered_json = nlohmann::ordered_json;

// fit rank for cca/ridge when the caller left it open: read the spectrum of
// a full-rank fit with the same criterion the sparse path uses
std::size_t resolve_rank(const std::optional<std::size_t>& requested,
                         const Vec& spectrum) {
  if (requested) return *requested;
  if (spectrum.size() < 2) return 1;
  return cca::select_rank(spectrum).rank;
}

struct FittedVectors {
  Mat a, b;
};

FittedVectors fit_method(Method method, const Mat& x_raw, const Mat& y_raw,
                         const Mat& xc, const Mat& yc, std::size_t rank,
                         std::uint64_t seed, const sar::SarConfig& base) {
  switch (method) {
    case Method::Sar: {
      sar::SarConfig config = base;
      config.rank = rank;
      config.seed = seed;
      sar::SarModel model = sar::sar_fit(x_raw, y_raw, config);
      return {model.a_sparse, model.b_sparse};
    }
    case Method::Ridge: {
      cca::RidgeParams params =
          cca::ridge_cv(xc, yc, cca::default_ridge_grid(),
                        cca::default_ridge_grid(), 5, seed);
      cca::CcaModel model = cca::canonical_ridge(xc, yc, params, rank);
      return {model.a, model.b};
    }
    case Method::Cca: {
      cca::CcaModel model = cca::classical_cca(xc, yc, rank);
      return {model.a, model.b};
    }
  }
  throw ContractError("unhandled method");
}

void aggregate(MethodReport& report) {
  double aa = 0, ab = 0, ta = 0, na = 0, tb = 0, nb = 0;
  std::size_t ok = 0;
  for (const RunMetrics& run : report.runs) {
    if (!run.ok) continue;
    ++ok;
    aa += run.angle_a;
    ab += run.angle_b;
    ta += run.tpr_a;
    na += run.tnr_a;
    tb += run.tpr_b;
    nb += run.tnr_b;
  }
  if (ok == 0) return;  // all failed: means stay at zero, failed says why
  double d = static_cast<double>(ok);
  report.mean_angle_a = aa / d;
  report.mean_angle_b = ab / d;
  report.mean_tpr_a = ta / d;
  report.mean_tnr_a = na / d;
  report.mean_tpr_b = tb / d;
  report.mean_tnr_b = nb / d;
}

}  // namespace

std::string method_name(Method method) {
  switch (method) {
    case Method::Sar: return "sar";
    case Method::Ridge: return "ridge";
    case Method::Cca: return "cca";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "sar") return Method::Sar;
  if (name == "ridge") return Method::Ridge;
  if (name == "cca") return Method::Cca;
  throw ContractError("unknown method \"" + name +
                      "\"; valid: sar, ridge, cca");
}

SimulationReport run_campaign(const DesignSpec& design,
                              const std::vector<Method>& methods,
                              std::size_t runs, std::uint64_t seed,
                              const sar::SarConfig& base) {
  if (methods.empty()) throw ContractError("no methods requested");
  if (runs < 1) throw ContractError("need at least one run");
  auto t0 = std::chrono::steady_clock::now();

  SimulationReport report;
  report.design = design.name;
  report.runs = runs;
  report.seed = seed;
  for (Method method : methods) {
    bool duplicate = false;
    for (const MethodReport& seen : report.methods)
      duplicate = duplicate || seen.method == method;
    if (duplicate) continue;
    MethodReport mr;
    mr.method = method;
    // classical CCA needs an invertible y-side covariance
    mr.feasible = !(method == Method::Cca && design.q >= design.n);
    report.methods.push_back(std::move(mr));
  }

  TrueVectors truth = true_canonical_vectors(design);

  for (std::size_t m = 1; m <= runs; ++m) {
    std::uint64_t run_seed = seed ^ static_cast<std::uint64_t>(m);
    Rng rng(run_seed);
    Dataset data = sample_dataset(design, rng);
    Mat xc = linalg::center_columns(data.x).centered;
    Mat yc = linalg::center_columns(data.y).centered;
    for (MethodReport& mr : report.methods) {
      if (!mr.feasible) continue;
      ++mr.attempted;
      RunMetrics rm;
      rm.run = m;
      try {
        FittedVectors fit = fit_method(mr.method, data.x, data.y, xc, yc,
                                       design.true_rank, run_seed, base);
        rm.angle_a = linalg::principal_subspace_angle(fit.a, truth.a);
        rm.angle_b = linalg::principal_subspace_angle(fit.b, truth.b);
        SparsityRates ra = sparsity_metrics(fit.a, truth.a);
        SparsityRates rb = sparsity_metrics(fit.b, truth.b);
        rm.tpr_a = ra.tpr;
        rm.tnr_a = ra.tnr;
        rm.tpr_b = rb.tpr;
        rm.tnr_b = rb.tnr;
        rm.ok = true;
      } catch (const Error& e) {
        rm.ok = false;
        rm.error = e.what();
        ++mr.failed;
      }
      mr.runs.push_back(std::move(rm));
    }
  }

  for (MethodReport& mr : report.methods) aggregate(mr);

  // paired comparison of per-run angles against the sparse fit
  const MethodReport* sar_report = nullptr;
  for (const MethodReport& mr : report.methods)
    if (mr.method == Method::Sar) sar_report = &mr;
  if (sar_report != nullptr) {
    for (MethodReport& mr : report.methods) {
      if (mr.method == Method::Sar || !mr.feasible) continue;
      std::vector<double> own_a, sar_a, own_b, sar_b;
      for (std::size_t i = 0; i < mr.runs.size(); ++i) {
        if (!mr.runs[i].ok || !sar_report->runs[i].ok) continue;
        own_a.push_back(mr.runs[i].angle_a);
        sar_a.push_back(sar_report->runs[i].angle_a);
        own_b.push_back(mr.runs[i].angle_b);
        sar_b.push_back(sar_report->runs[i].angle_b);
      }
      if (own_a.size() >= 2) {
        mr.has_t_test = true;
        mr.t_test_angle_a = paired_t_test(own_a, sar_a);
        mr.t_test_angle_b = paired_t_test(own_b, sar_b);
      }
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

double loo_cv_score(const Mat& x, const Mat& y, Method method,
                    const sar::SarConfig& config) {
  if (x.rows() != y.rows()) throw ShapeError("data sets differ in rows");
  const Index n = x.rows();
  if (n < 3) throw DegenerateInputError("leave-one-out needs at least 3 rows");
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    try {
      Mat xtr(n - 1, x.cols()), ytr(n - 1, y.cols());
      Index k = 0;
      for (Index r = 0; r < n; ++r) {
        if (r == i) continue;
        xtr.row(k) = x.row(r);
        ytr.row(k++) = y.row(r);
      }
      auto cx = linalg::center_columns(xtr);
      auto cy = linalg::center_columns(ytr);
      Mat a, b;
      if (method == Method::Sar) {
        sar::SarModel model = sar::sar_fit(cx.centered, cy.centered, config);
        a = model.a_sparse;
        b = model.b_sparse;
      } else {
        auto cap = static_cast<std::size_t>(
            std::min({x.cols(), y.cols(), n - 2}));
        std::size_t fit_rank =
            config.rank ? *config.rank : std::max<std::size_t>(cap, 1);
        cca::CcaModel model;
        if (method == Method::Ridge) {
          cca::RidgeParams params =
              cca::ridge_cv(cx.centered, cy.centered, cca::default_ridge_grid(),
                            cca::default_ridge_grid(), 5, config.seed);
          model = cca::canonical_ridge(cx.centered, cy.centered, params,
                                       fit_rank);
        } else {
          model = cca::classical_cca(cx.centered, cy.centered, fit_rank);
        }
        std::size_t rank = resolve_rank(config.rank, model.rho);
        a = model.a.leftCols(static_cast<Index>(rank));
        b = model.b.leftCols(static_cast<Index>(rank));
      }
      Vec hx = x.row(i).transpose() - cx.means;
      Vec hy = y.row(i).transpose() - cy.means;
      total += (a.transpose() * hx - b.transpose() * hy).squaredNorm();
    } catch (const Error& e) {
      throw FoldFitError("fold " + std::to_string(i) + ": " + e.what(),
                         static_cast<std::size_t>(i));
    }
  }
  return total / static_cast<double>(n);
}

std::string report_to_json(const SimulationReport& report) {
  ordered_json doc;
  doc["schema_version"] = 1;
  doc["design"] = report.design;
  doc["runs"] = report.runs;
  doc["seed"] = report.seed;
  doc["methods"] = ordered_json::array();
  for (const MethodReport& mr : report.methods) {
    ordered_json jm;
    jm["method"] = method_name(mr.method);
    jm["feasible"] = mr.feasible;
    jm["attempted"] = mr.attempted;
    jm["failed"] = mr.failed;
    jm["mean_angle_a"] = mr.mean_angle_a;
    jm["mean_angle_b"] = mr.mean_angle_b;
    jm["mean_tpr_a"] = mr.mean_tpr_a;
    jm["mean_tnr_a"] = mr.mean_tnr_a;
    jm["mean_tpr_b"] = mr.mean_tpr_b;
    jm["mean_tnr_b"] = mr.mean_tnr_b;
    if (mr.has_t_test) {
      ordered_json jt;
      jt["angle_a"] = {{"statistic", mr.t_test_angle_a.statistic},
                       {"p_value", mr.t_test_angle_a.p_value},
                       {"dof", mr.t_test_angle_a.dof}};
      jt["angle_b"] = {{"statistic", mr.t_test_angle_b.statistic},
                       {"p_value", mr.t_test_angle_b.p_value},
                       {"dof", mr.t_test_angle_b.dof}};
      jm["t_test_vs_sar"] = jt;
    } else {
      jm["t_test_vs_sar"] = nullptr;
    }
    jm["per_run"] = ordered_json::array();
    for (const RunMetrics& run : mr.runs) {
      ordered_json jr;
      jr["run"] = run.run;
      jr["ok"] = run.ok;
      if (!run.ok) jr["error"] = run.error;
      jr["angle_a"] = run.angle_a;
      jr["angle_b"] = run.angle_b;
      jr["tpr_a"] = run.tpr_a;
      jr["tnr_a"] = run.tnr_a;
      jr["tpr_b"] = run.tpr_b;
      jr["tnr_b"] = run.tnr_b;
      jm["per_run"].push_back(std::move(jr));
    }
    doc["methods"].push_back(std::move(jm));
  }
  return doc.dump(2) + "\n";
}

std::string report_to_csv(const SimulationReport& report) {
  std::string out = "design,method,metric,value\n";
  auto row = [&](const MethodReport& mr, const std::string& metric,
                 const std::string& value) {
    out += report.design + "," + method_name(mr.method) + "," + metric + "," +
           value + "\n";
  };
  for (const MethodReport& mr : report.methods) {
    row(mr, "feasible", mr.feasible ? "1" : "0");
    row(mr, "attempted", std::to_string(mr.attempted));
    row(mr, "failed", std::to_string(mr.failed));
    row(mr, "mean_angle_a", format_double(mr.mean_angle_a));
    row(mr, "mean_angle_b", format_double(mr.mean_angle_b));
    row(mr, "mean_tpr_a", format_double(mr.mean_tpr_a));
    row(mr, "mean_tnr_a", format_double(mr.mean_tnr_a));
    row(mr, "mean_tpr_b", format_double(mr.mean_tpr_b));
    row(mr, "mean_tnr_b", format_double(mr.mean_tnr_b));
    if (mr.has_t_test) {
      row(mr, "t_statistic_angle_a", format_double(mr.t_test_angle_a.statistic));
      row(mr, "t_p_value_angle_a", format_double(mr.t_test_angle_a.p_value));
      row(mr, "t_statistic_angle_b", format_double(mr.t_test_angle_b.statistic));
      row(mr, "t_p_value_angle_b", format_double(mr.t_test_angle_b.p_value));
    }
  }
  return out;
}

}  // namespace scca::sim
