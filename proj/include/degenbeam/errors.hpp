#pragma once

#include <stdexcept>
#include <string>

namespace degenbeam {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inputs outside the range the theory covers (K >= 2, strongly degenerate
// feedback without both stiffness terms, ...).
class OutOfScopeError : public Error {
 public:
  using Error::Error;
};

class InvalidCoefficientError : public Error {
 public:
  using Error::Error;
};

class InvalidArgumentError : public Error {
 public:
  using Error::Error;
};

class DivergentIntegralError : public Error {
 public:
  using Error::Error;
};

class WrongRegimeError : public Error {
 public:
  using Error::Error;
};

class InfeasibleConstantsError : public Error {
 public:
  using Error::Error;
};

class UndefinedCostError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace degenbeam
