#pragma once

#include <stdexcept>

namespace robadd {

/// Numerical failure (singular systems after jitter, degenerate weights, ...).
/// Distinct from std::invalid_argument so callers can map the two onto
/// different exit codes.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace robadd
