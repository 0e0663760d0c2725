#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wg {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A parameter or argument lies outside its admissible domain.
struct DomainError : Error {
  using Error::Error;
};

/// Degenerate or inverted geometry: zero-speed curves, folded maps,
/// singular Gram matrices.
struct GeometryError : Error {
  using Error::Error;
};

/// Adaptive integration failed to reach the requested accuracy.
struct AccuracyError : Error {
  using Error::Error;
};

/// Mesh generation, classification or file-format failure.
struct MeshError : Error {
  using Error::Error;
};

/// Linear solver failure; carries the residual history when iterating.
struct SolverError : Error {
  explicit SolverError(const std::string& what, std::vector<double> history = {})
      : Error(what), residual_history(std::move(history)) {}
  std::vector<double> residual_history;
};

/// Rejected study configuration.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace wg
