#pragma once

#include <stdexcept>
#include <string>

namespace alphadisc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two measures compared over different supports.
class SupportMismatchError : public Error {
 public:
  using Error::Error;
};

/// Input outside the mathematical domain of an operation (negative weight,
/// non-positive-definite matrix, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Requested an alpha limit that has no closed form.
class UnsupportedLimitError : public Error {
 public:
  using Error::Error;
};

/// The Jacobian of a map lost column rank, so no immersion exists there.
class RankDeficiencyError : public Error {
 public:
  using Error::Error;
};

/// alpha*A + (1-alpha)*I is not positive definite.
class IndefiniteCombinationError : public Error {
 public:
  IndefiniteCombinationError(const std::string& what, double eigenvalue)
      : Error(what), eigenvalue_(eigenvalue) {}
  double eigenvalue() const noexcept { return eigenvalue_; }

 private:
  double eigenvalue_;
};

/// A map or cost produced NaN or infinity.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (weights file, CSV).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A one-dimensional search bracket does not contain an interior minimum.
class BracketError : public Error {
 public:
  using Error::Error;
};

/// An iterative routine ran out of iterations.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace alphadisc
