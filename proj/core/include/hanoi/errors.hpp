#pragma once

#include <stdexcept>
#include <string>

namespace hanoi {

/// Raised when a parameter violates its admissible range (alpha, beta, level,
/// subdivision count, eigenvalue count, window). The message names the bound.
class InvalidParameter : public std::invalid_argument {
 public:
  explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a linear or eigenvalue solver fails: factorization breakdown,
/// or Ritz pairs that did not reach the requested residual.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an artifact cannot be read or written.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hanoi
