#pragma once

#include <stdexcept>
#include <string>

namespace sopcc {

/// Malformed or degenerate problem instance (bad sizes, zero-length edges, ...).
struct InvalidInstanceError : std::runtime_error {
  explicit InvalidInstanceError(const std::string& what) : std::runtime_error(what) {}
};

/// Contract violation on an edge/path argument (self-loop, repeated vertex, ...).
struct InvalidPathError : std::runtime_error {
  explicit InvalidPathError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite loss or gradient during optimization.
struct TrainingDivergedError : std::runtime_error {
  explicit TrainingDivergedError(const std::string& what) : std::runtime_error(what) {}
};

/// Requested configuration the oracle cannot evaluate analytically.
struct UnsupportedConfigurationError : std::runtime_error {
  explicit UnsupportedConfigurationError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace sopcc
