#pragma once

#include <stdexcept>
#include <string>

namespace amenwalk {

// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: unknown symbols, bad words, violated preconditions,
// non-stochastic measures.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// A computation needed more states than the configured memory budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

// An iterative method hit its iteration cap.
class ConvergenceFailure : public Error {
 public:
  ConvergenceFailure(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace amenwalk
