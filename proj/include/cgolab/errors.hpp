#pragma once

#include <stdexcept>
#include <string>

namespace cgolab {

// Base of every error the library raises on purpose.
class LabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public LabError {
 public:
  using LabError::LabError;
};

// k^2 + a^2 <= r^2/4: the real square root in the probing frame does not exist.
class InvalidFrequencyRange : public LabError {
 public:
  using LabError::LabError;
};

// The shifted-lattice symbol of Delta + 2i zeta.grad came too close to zero.
class DegenerateSymbol : public LabError {
 public:
  using LabError::LabError;
};

// The CGO fixed point did not contract: |xi| too small relative to the potential.
class NoContraction : public LabError {
 public:
  using LabError::LabError;
};

// k^2 sits on (or numerically at) a Dirichlet eigenvalue of -Delta - q.
class ResonantFrequency : public LabError {
 public:
  using LabError::LabError;
};

class InsufficientData : public LabError {
 public:
  using LabError::LabError;
};

// More than the tolerated fraction of Fourier probes failed.
class AcquisitionFailure : public LabError {
 public:
  using LabError::LabError;
};

class IoError : public LabError {
 public:
  using LabError::LabError;
};

}  // namespace cgolab
