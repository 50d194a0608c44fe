#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace scca {

/// Deterministic random source used by everything stochastic in the library:
/// an mt19937_64 stream (its output sequence is fixed by the C++ standard)
/// with an explicit 53-bit uniform mapping and Marsaglia polar normals.
/// Identical seeds give identical draws on any IEEE-double platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via the polar method (no sin/cos).
  double normal();

  /// Uniform integer in [0, n). n must be positive.
  std::size_t below(std::size_t n);

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace scca
