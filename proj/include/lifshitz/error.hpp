#pragma once

#include <stdexcept>
#include <string>

namespace lifshitz {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Energy outside the admissible range of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Quadrature or solver failure. Carries the best error estimate reached.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double achieved = -1.0)
      : Error(what), achieved_(achieved) {}
  double achieved_estimate() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace lifshitz
