#pragma once

#include <exception>
#include <stdexcept>
#include <string>

namespace wealthflow {

// Bad input: malformed config, violated precondition, inconsistent data.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure at run time: overflow, non-convergence, degenerate statistics.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// File system or stream failure.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Process exit status for an exception: 1 validation, 3 I/O, 2 anything else.
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ValidationError*>(&e)) return 1;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  return 2;
}

}  // namespace wealthflow
