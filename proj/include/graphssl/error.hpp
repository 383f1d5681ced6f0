#pragma once

#include <stdexcept>
#include <string>

namespace graphssl {

/// Base class for every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments: negative weights, size mismatches, out-of-range parameters.
class invalid_input : public error {
 public:
  using error::error;
};

/// An autocorrelation index was requested for a (numerically) constant vector.
class degenerate_variance : public error {
 public:
  using error::error;
};

/// A linear system could not be solved to the required residual.
class solve_failure : public error {
 public:
  using error::error;
};

/// An iterative method hit its iteration cap.
class convergence_failure : public error {
 public:
  using error::error;
};

/// Problem size beyond a configured dense-computation cap.
class capacity_exceeded : public error {
 public:
  using error::error;
};

}  // namespace graphssl
