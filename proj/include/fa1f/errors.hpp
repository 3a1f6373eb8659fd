#pragma once

#include <stdexcept>
#include <string>

namespace fa1f {

// Argument outside the mathematical domain of an operation (q outside (0,1),
// window larger than the volume, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// State space or linear system too large for the exhaustive oracles.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Disconnected graph, frozen origin, and similar structural defects.
class StructuralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Solver failure. Mapped to exit code 2 by the command line runner.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An estimator divides by a quantity that came out as zero.
class DegenerateEstimate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace fa1f
