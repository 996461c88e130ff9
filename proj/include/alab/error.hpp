#ifndef ALAB_ERROR_HPP
#define ALAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace alab {

// Bad arguments: wrong dimension, site outside the box, invalid parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of a numerical routine on valid input.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation needs a bounded density (fractional-moment bounds) but got atoms.
class NoDensityError : public InvalidArgument {
 public:
  explicit NoDensityError(const std::string& what)
      : InvalidArgument("no density: " + what) {}
};

// Real shift within the declared tolerance of an eigenvalue.
class SingularShiftError : public NumericError {
 public:
  using NumericError::NumericError;
};

class QuadratureError : public NumericError {
 public:
  using NumericError::NumericError;
};

class CyclicityError : public NumericError {
 public:
  using NumericError::NumericError;
};

class DegenerateEigenvalueError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Too few data points or levels for a requested statistic.
class InsufficientDataError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace alab

#endif  // ALAB_ERROR_HPP
