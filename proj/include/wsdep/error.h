#ifndef WSDEP_ERROR_H_
#define WSDEP_ERROR_H_

#include <stdexcept>
#include <string>

namespace wsdep {

// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments or inputs that violate an operation's preconditions.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Failures of the numerical machinery on otherwise well-formed input.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class InvalidAssignmentError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidLabelError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EnumerationTooLargeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientSamplesError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionMismatchError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SaturationError : public NumericalError {
 public:
  SaturationError(const std::string& what, double exponent)
      : NumericalError(what), exponent_(exponent) {}
  double exponent() const { return exponent_; }

 private:
  double exponent_;
};

class SingularMatrixError : public NumericalError {
 public:
  SingularMatrixError(const std::string& what, double smallest_eigenvalue)
      : NumericalError(what), smallest_eigenvalue_(smallest_eigenvalue) {}
  double smallest_eigenvalue() const { return smallest_eigenvalue_; }

 private:
  double smallest_eigenvalue_;
};

class NonPsdSchurError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class UndefinedEffectiveRankError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPsdError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NumericalFailureError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace wsdep

#endif  // WSDEP_ERROR_H_
