#pragma once

#include <cstddef>
#include <string>

#include "scca/rng.hpp"
#include "scca/types.hpp"

namespace scca::sim {

// Gaussian simulation designs for the benchmark harness. Each design fixes a
// joint covariance for (x, y) with exactly two correlated canonical pairs, a
// 3x3 leading block structure on the y side, and zeros elsewhere, so the true
// canonical vectors are sparse and known.

struct DesignSpec {
  std::string name;
  std::size_t n = 0;  // observations per sampled dataset
  std::size_t p = 0;  // x variables
  std::size_t q = 0;  // y variables
  Mat sigma;          // (p+q) x (p+q) joint covariance, x block first
  std::size_t true_rank = 2;
};

/// Look up a design by name: "uncorrelated", "correlated",
/// "high_dimensional" or "overparametrized". Unknown names throw with the
/// valid names listed.
DesignSpec build_design(const std::string& name);

struct Dataset {
  Mat x;  // n x p
  Mat y;  // n x q
};

/// Draw n rows from N(0, spec.sigma) and split into the x and y blocks.
/// Rows are generated in order, each from p+q consecutive normal draws.
Dataset sample_dataset(const DesignSpec& spec, Rng& rng);

struct TrueVectors {
  Mat a;    // p x true_rank
  Mat b;    // q x true_rank
  Vec rho;  // population canonical correlations
};

/// Population canonical vectors of the design covariance, first true_rank
/// pairs.
TrueVectors true_canonical_vectors(const DesignSpec& spec);

}  // namespace scca::sim
