#pragma once

#include <stdexcept>
#include <string>

namespace miisac {

/// Input outside the physical parameter space (non-positive range, conductivity, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fisher information numerically rank-deficient; bounds diverge.
class SingularFimError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pilot block with zero total energy.
class DegeneratePilotError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace miisac
