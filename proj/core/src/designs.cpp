#include "scca/designs.hpp"

#include <cmath>
#include <string>

#include "scca/cca.hpp"
#include "scca/errors.hpp"
#include "scca/linalg.hpp"

namespace scca::sim {

namespace {

// 3x3 first-order autoregressive correlation block, entries rho^|i-j|
Mat ar1_block(double rho) {
  Mat s(3, 3);
  for (Index i = 0; i < 3; ++i)
    for (Index j = 0; j < 3; ++j)
      s(i, j) = std::pow(rho, std::abs(static_cast<double>(i - j)));
  return s;
}

DesignSpec assemble(std::string name, std::size_t n, std::size_t p,
                    std::size_t q, const Mat& syy_block, const Mat& sxy_block) {
  DesignSpec spec;
  spec.name = std::move(name);
  spec.n = n;
  spec.p = p;
  spec.q = q;
  spec.true_rank = 2;
  const auto pi = static_cast<Index>(p);
  const auto qi = static_cast<Index>(q);
  Mat sigma = Mat::Zero(pi + qi, pi + qi);
  sigma.topLeftCorner(pi, pi) = Mat::Identity(pi, pi);
  sigma.bottomRightCorner(qi, qi) = Mat::Identity(qi, qi);
  sigma.block(pi, pi, syy_block.rows(), syy_block.cols()) = syy_block;
  sigma.block(0, pi, sxy_block.rows(), sxy_block.cols()) = sxy_block;
  sigma.block(pi, 0, sxy_block.cols(), sxy_block.rows()) =
      sxy_block.transpose();
  spec.sigma = std::move(sigma);
  linalg::cholesky(spec.sigma);  // every design must be positive definite
  return spec;
}

}  // namespace

DesignSpec build_design(const std::string& name) {
  if (name == "uncorrelated") {
    Mat sxy = Mat::Zero(2, 2);
    sxy(0, 0) = 0.6;
    sxy(1, 1) = 0.5;
    return assemble(name, 50, 4, 6, Mat::Identity(3, 3), sxy);
  }
  if (name == "correlated")
    return assemble(name, 50, 6, 10, ar1_block(0.7),
                    0.5 * Mat::Identity(2, 2));
  if (name == "high_dimensional")
    return assemble(name, 50, 25, 40, ar1_block(0.3),
                    0.7 * Mat::Identity(2, 2));
  if (name == "overparametrized")
    return assemble(name, 80, 60, 85, ar1_block(0.3),
                    0.7 * Mat::Identity(2, 2));
  throw ContractError("unknown design \"" + name +
                      "\"; valid: uncorrelated, correlated, high_dimensional, "
                      "overparametrized");
}

Dataset sample_dataset(const DesignSpec& spec, Rng& rng) {
  const auto n = static_cast<Index>(spec.n);
  const auto p = static_cast<Index>(spec.p);
  const auto q = static_cast<Index>(spec.q);
  Mat l = linalg::cholesky(spec.sigma);
  Dataset data;
  data.x.resize(n, p);
  data.y.resize(n, q);
  Vec g(p + q);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p + q; ++j) g(j) = rng.normal();
    Vec z = l * g;
    data.x.row(i) = z.head(p);
    data.y.row(i) = z.tail(q);
  }
  return data;
}

TrueVectors true_canonical_vectors(const DesignSpec& spec) {
  cca::CcaModel population =
      cca::population_cca(spec.sigma, spec.p, spec.q, spec.true_rank);
  return {population.a, population.b, population.rho};
}

}  // namespace scca::sim
