#pragma once

#include <stdexcept>
#include <string>

namespace photostat {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition or invalid user input. The CLI maps this to exit code 2.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A numerical contract could not be met (quadrature did not converge,
// orthogonality self-test failed, ...). The CLI maps this to exit code 3.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace photostat
