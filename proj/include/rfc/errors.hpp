#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace rfc {

// Bad arguments: non-positive physical parameters, zero polynomials, empty grids.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Transfer functions with different sample times were combined.
class IncompatibleSystems : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A model outside the supported class (overdamped environment, unstable S
// where a stable one is required, ...).
class UnsupportedModel : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// deg(num) > deg(den) where a causal system is required.
class ImproperSystem : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Any failure of an iterative numerical routine.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PoleEvaluation : public NumericalError {
 public:
  PoleEvaluation(const std::string& what, std::complex<double> z)
      : NumericalError(what), z_(z) {}
  std::complex<double> z() const { return z_; }

 private:
  std::complex<double> z_;
};

class NoCrossing : public NumericalError {
 public:
  NoCrossing(const std::string& what, double lo_value, double hi_value)
      : NumericalError(what), lo_value_(lo_value), hi_value_(hi_value) {}
  double lo_value() const { return lo_value_; }
  double hi_value() const { return hi_value_; }

 private:
  double lo_value_;
  double hi_value_;
};

class SingularSample : public NumericalError {
 public:
  SingularSample(const std::string& what, double omega)
      : NumericalError(what), omega_(omega) {}
  double omega() const { return omega_; }

 private:
  double omega_;
};

}  // namespace rfc
