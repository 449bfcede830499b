#pragma once

#include <stdexcept>
#include <string>

namespace droc {

/// Base class for every failure raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A state, control or value became NaN/inf.
class NumericalFault : public Error {
 public:
  using Error::Error;
};

/// Steering angle at or beyond the tan() pole.
class SingularLinearization : public Error {
 public:
  using Error::Error;
};

/// W^{-1} - theta*S lost positive definiteness: theta is outside the feasible set.
class RiskInfeasible : public Error {
 public:
  using Error::Error;
};

/// Control Hessian stayed indefinite after the full regularization schedule.
class SingularH : public Error {
 public:
  using Error::Error;
};

class TooFewSamples : public Error {
 public:
  using Error::Error;
};

class IllConditionedKernel : public Error {
 public:
  using Error::Error;
};

class WindowTooLarge : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace droc
