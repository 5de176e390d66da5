#pragma once

#include <stdexcept>
#include <string>

namespace rtmix {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A (dimension, degree) combination or option the library does not provide.
class UnsupportedFeature : public Error {
 public:
  using Error::Error;
};

/// Broken mesh connectivity or a degenerate cell.
class MeshIntegrityError : public Error {
 public:
  using Error::Error;
};

/// A local dense system that should be regular turned out singular.
class NumericalDegeneracy : public Error {
 public:
  using Error::Error;
};

/// The global step matrix could not be factored, or a solve missed the
/// residual contract.
class SolvabilityError : public Error {
 public:
  using Error::Error;
};

/// Non-finite coefficients appeared during time stepping.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long step) : Error(what), step_(step) {}
  long step() const noexcept { return step_; }

 private:
  long step_;
};

/// Malformed or inconsistent study configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace rtmix
