#pragma once

#include <stdexcept>
#include <string>

namespace qwalk {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A matrix handed in as a coin is not unitary.
class InvalidOperator : public Error {
 public:
  using Error::Error;
};

/// A walker state violates its normalization contract.
class InvalidState : public Error {
 public:
  using Error::Error;
};

/// No admissible step size has nonzero weight.
class DegenerateDistribution : public Error {
 public:
  using Error::Error;
};

/// Not Hermitian, not unit trace, or a negative eigenvalue beyond tolerance.
class InvalidDensity : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

/// The dense reference lattice would be left by some amplitude.
class LatticeTooSmall : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed or invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace qwalk
