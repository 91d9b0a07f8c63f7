#pragma once

#include <stdexcept>
#include <string>

namespace mhtest {

// Bad caller input: dimensions, invalid probabilities, out-of-range parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A parameter lies outside the interval where the quantity is defined.
class RangeError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// An iterative method stopped before reaching its tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

// An enumeration would exceed the configured size cap.
class ResourceCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mhtest
