#pragma once

#include <stdexcept>
#include <string>

namespace subnewton {

// Bad input files or malformed records.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated preconditions on arguments or configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or numerically degenerate models.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace subnewton
