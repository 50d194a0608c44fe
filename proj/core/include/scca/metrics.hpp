#pragma once

#include <cstddef>
#include <vector>

#include "scca/types.hpp"

namespace scca::sim {

struct SparsityRates {
  double tpr = 0.0;  // fraction of truly nonzero entries estimated nonzero
  double tnr = 0.0;  // fraction of truly zero entries estimated exactly zero
  bool no_true_zeros = false;  // tnr reported as 1 and meaningless when set
};

/// Support recovery of `estimate` against `truth`, over all matrix entries.
/// Truth entries with |value| <= 1e-10 count as zero (they come from a
/// numerical eigensolver); estimate entries count as zero only when exactly
/// zero (coordinate descent produces hard zeros).
SparsityRates sparsity_metrics(const Mat& estimate, const Mat& truth);

struct PairedTTest {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t dof = 0;
};

/// Two-sided paired t-test on matched samples. Throws if sizes differ or
/// fewer than two pairs. A zero difference variance gives statistic 0 / p 1
/// when the mean difference is zero too, +/-inf / p 0 otherwise.
PairedTTest paired_t_test(const std::vector<double>& first,
                          const std::vector<double>& second);

/// P(|T_dof| >= |t|) for a Student t variable, via the regularized
/// incomplete beta function.
double student_t_two_sided_p(double t, std::size_t dof);

}  // namespace scca::sim
