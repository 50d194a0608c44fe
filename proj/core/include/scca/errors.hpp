#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scca {

/// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dimension mismatch between arguments.
struct ShapeError : Error {
  using Error::Error;
};

/// Input too small or structurally empty to operate on.
struct DegenerateInputError : Error {
  using Error::Error;
};

/// A documented precondition was violated (non-finite data, asymmetry, ...).
struct ContractError : Error {
  using Error::Error;
};

struct NotPositiveDefiniteError : Error {
  using Error::Error;
};

/// Matrix does not have the required (column) rank.
struct RankError : Error {
  using Error::Error;
};

/// A sample covariance matrix cannot be inverted.
struct SingularityError : Error {
  using Error::Error;
};

/// Iterative solver hit its sweep budget before meeting the tolerance.
struct ConvergenceError : Error {
  std::size_t iterations;
  ConvergenceError(const std::string& what, std::size_t iters)
      : Error(what), iterations(iters) {}
};

/// No association left in the data: a regression step produced the zero vector
/// and no penalty on the path rescues it.
struct ZeroAssociationError : Error {
  using Error::Error;
};

/// Malformed CSV input; the message carries a row/column diagnostic.
struct CsvError : Error {
  using Error::Error;
};

/// A cross-validation refit failed; `fold` identifies the left-out index.
struct FoldFitError : Error {
  std::size_t fold;
  FoldFitError(const std::string& what, std::size_t fold_index)
      : Error(what), fold(fold_index) {}
};

}  // namespace scca
