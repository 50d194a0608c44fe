#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "scca/designs.hpp"
#include "scca/metrics.hpp"
#include "scca/sar.hpp"
#include "scca/types.hpp"

namespace scca::sim {

enum class Method { Sar, Ridge, Cca };

std::string method_name(Method method);
Method method_from_string(const std::string& name);  // throws on unknown name

/// One Monte-Carlo repetition of one method. Run m (1-based) draws its data
/// and fits with generator seed campaign_seed ^ m.
struct RunMetrics {
  std::size_t run = 0;
  bool ok = false;
  std::string error;  // what went wrong when !ok
  double angle_a = 0.0, angle_b = 0.0;  // largest principal angle vs truth
  double tpr_a = 0.0, tnr_a = 0.0;
  double tpr_b = 0.0, tnr_b = 0.0;
};

struct MethodReport {
  Method method = Method::Sar;
  bool feasible = true;       // false: skipped entirely (classical CCA, q >= n)
  std::size_t attempted = 0;  // equals the campaign run count when feasible
  std::size_t failed = 0;
  // Means over successful runs only.
  double mean_angle_a = 0.0, mean_angle_b = 0.0;
  double mean_tpr_a = 0.0, mean_tnr_a = 0.0;
  double mean_tpr_b = 0.0, mean_tnr_b = 0.0;
  std::vector<RunMetrics> runs;
  // Paired test of this method's per-run angles against the sparse
  // alternating fit's, over runs where both succeeded. Absent for the sparse
  // method itself and when it was not part of the campaign.
  bool has_t_test = false;
  PairedTTest t_test_angle_a, t_test_angle_b;
};

struct SimulationReport {
  std::string design;
  std::size_t runs = 0;  // requested repetitions
  std::uint64_t seed = 0;
  // Measured, never serialized: report bytes must be seed-deterministic.
  double wall_seconds = 0.0;
  std::vector<MethodReport> methods;
};

/// Monte-Carlo comparison on one design: per run, draw a dataset, fit every
/// requested method at the design's true rank, score angles and support
/// recovery against the population vectors, then average. Failed runs are
/// recorded and excluded from the means. The sparse fit inherits `base`
/// (rank/seed overridden per run); the ridge fit tunes its penalties by
/// cross-validation per run; classical CCA is marked infeasible when q >= n.
SimulationReport run_campaign(const DesignSpec& design,
                              const std::vector<Method>& methods,
                              std::size_t runs, std::uint64_t seed,
                              const sar::SarConfig& base = {});

/// Leave-one-out score: refit without observation i, center the held-out
/// pair with the training means, accumulate |A'x_i - B'y_i|^2 / n. The
/// config's rank/penalty/seed fields apply where the method uses them.
/// A failed subsample fit raises an error identifying the fold.
double loo_cv_score(const Mat& x, const Mat& y, Method method,
                    const sar::SarConfig& config);

/// Stable-key-order JSON document (schema_version 1); see README for the
/// field list. Byte-identical across repeated campaigns with equal inputs.
std::string report_to_json(const SimulationReport& report);

/// Long-form table "design,method,metric,value", one row per method and
/// aggregate metric, values with 17 significant digits.
std::string report_to_csv(const SimulationReport& report);

}  // namespace scca::sim
