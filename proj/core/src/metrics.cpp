#include "scca/metrics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "scca/errors.hpp"

namespace scca::sim {

namespace {

constexpr double kTruthZero = 1e-10;

// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction,
// accurate to ~1e-14 for the Student tail probabilities used here.
double beta_cf(double a, double b, double x) {
  const double fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    double dm = m;
    double m2 = 2.0 * dm;
    double aa = dm * (b - dm) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + dm) * (qab + dm) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return h;
}

double reg_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = a * std::log(x) + b * std::log1p(-x) +
                    std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

}  // namespace

SparsityRates sparsity_metrics(const Mat& estimate, const Mat& truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw ShapeError("estimate and truth shapes differ");
  std::size_t true_pos = 0, true_neg = 0, n_nonzero = 0, n_zero = 0;
  for (Index j = 0; j < truth.cols(); ++j) {
    for (Index i = 0; i < truth.rows(); ++i) {
      bool truth_nonzero = std::abs(truth(i, j)) > kTruthZero;
      bool est_nonzero = estimate(i, j) != 0.0;
      if (truth_nonzero) {
        ++n_nonzero;
        if (est_nonzero) ++true_pos;
      } else {
        ++n_zero;
        if (!est_nonzero) ++true_neg;
      }
    }
  }
  SparsityRates rates;
  rates.tpr = n_nonzero == 0
                  ? 1.0
                  : static_cast<double>(true_pos) / static_cast<double>(n_nonzero);
  if (n_zero == 0) {
    rates.tnr = 1.0;
    rates.no_true_zeros = true;
  } else {
    rates.tnr = static_cast<double>(true_neg) / static_cast<double>(n_zero);
  }
  return rates;
}

PairedTTest paired_t_test(const std::vector<double>& first,
                          const std::vector<double>& second) {
  if (first.size() != second.size())
    throw ShapeError("paired samples differ in length");
  const std::size_t n = first.size();
  if (n < 2) throw DegenerateInputError("paired test needs at least 2 pairs");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += first[i] - second[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = first[i] - second[i] - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / static_cast<double>(n - 1));
  PairedTTest test;
  test.dof = n - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      test.statistic = 0.0;
      test.p_value = 1.0;
    } else {
      test.statistic = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                  : -std::numeric_limits<double>::infinity();
      test.p_value = 0.0;
    }
    return test;
  }
  test.statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  test.p_value = student_t_two_sided_p(test.statistic, test.dof);
  return test;
}

double student_t_two_sided_p(double t, std::size_t dof) {
  if (dof < 1) throw ContractError("degrees of freedom must be positive");
  if (std::isnan(t)) throw ContractError("non-finite test statistic");
  if (std::isinf(t)) return 0.0;
  double v = static_cast<double>(dof);
  return reg_incomplete_beta(v / 2.0, 0.5, v / (v + t * t));
}

}  // namespace scca::sim
