#pragma once

#include <stdexcept>
#include <string>

namespace p2ptopo {

// Base of every error the library throws. The CLI maps the subclasses onto
// exit codes: ParameterError/DataError/UndefinedError -> 2, ConvergenceError -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments to an operation (bad generator parameters, unknown ids).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed input files and configs.
class DataError : public Error {
 public:
  using Error::Error;
};

// Quantity is mathematically undefined for the given input (zero variance,
// no reachable pair, fewer than two nodes).
class UndefinedError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double last_residual)
      : Error(what), residual_(last_residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace p2ptopo
