#pragma once

#include <stdexcept>
#include <string>

namespace homlab {

// Base of every error raised by the library. The CLI maps each subclass onto
// a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// potential
class NonPeriodicAntiderivative : public Error {
 public:
  using Error::Error;
};

class InvalidPotential : public Error {
 public:
  using Error::Error;
};

// regime resolution
class NoApplicableRegime : public Error {
 public:
  using Error::Error;
};

class UnsupportedK : public Error {
 public:
  using Error::Error;
};

// correctors
class SolvabilityViolation : public Error {
 public:
  using Error::Error;
};

class ChainIdentityViolation : public Error {
 public:
  using Error::Error;
};

// pdesolve
class ResolutionViolation : public Error {
 public:
  using Error::Error;
};

class BlowUp : public Error {
 public:
  using Error::Error;
};

class GridMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidGrid : public Error {
 public:
  using Error::Error;
};

// ratelab
class DegenerateFit : public Error {
 public:
  using Error::Error;
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class InvalidSweep : public Error {
 public:
  using Error::Error;
};

// cli
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace homlab
