#pragma once

#include <stdexcept>
#include <string>

namespace bmhd {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input shape, bad argument, or violated precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration could not be parsed or failed validation (exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Density reached vacuum (1 + a <= 0) somewhere on the grid.
class SingularDensity : public Error {
 public:
  using Error::Error;
};

/// Trajectory left the valid regime: NaN/Inf, vacuum, or dt underflow (exit code 3).
class BlowUp : public Error {
 public:
  BlowUp(const std::string& what, double time) : Error(what), time_(time) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Filesystem or checkpoint format failure (exit code 4).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace bmhd
