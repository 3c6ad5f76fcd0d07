#pragma once

#include <stdexcept>
#include <string>

namespace sgh {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid constituent data (e.g. incompressible Poisson ratio).
struct MaterialError : Error {
  using Error::Error;
};

/// Inclusion does not fit the unit cell, or the shape does not match the dimension.
struct GeometryError : Error {
  using Error::Error;
};

/// Malformed or out-of-range run configuration.
struct ConfigError : Error {
  using Error::Error;
};

/// Linear solve did not reach the requested tolerance.
struct SolverError : Error {
  using Error::Error;
};

/// Right-hand side has a component along the translation nullspace of the
/// periodic operator, i.e. the corrector problem is not solvable.
struct CompatibilityError : SolverError {
  using SolverError::SolverError;
};

/// Tensor or matrix shapes do not agree.
struct DimensionError : Error {
  using Error::Error;
};

}  // namespace sgh
