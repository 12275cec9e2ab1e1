#pragma once

#include <stdexcept>
#include <string>

namespace cvmdi {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A covariance matrix violates the uncertainty principle (symplectic eigenvalue < 1).
class PhysicalityError : public Error {
 public:
  using Error::Error;
};

/// Floating-point degeneracy beyond tolerance (e.g. negative discriminant).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A parameter set is internally inconsistent or not representable.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent quadrature data.
class DatasetError : public Error {
 public:
  using Error::Error;
};

}  // namespace cvmdi
