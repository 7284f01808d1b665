#pragma once

#include <stdexcept>
#include <string>

namespace erl {

// Base of every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Vector/matrix shapes or window sizes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Inputs outside an operation's domain (negative speed, t out of range, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// The requested combination is not supported (d > 1 for the grid DP,
// a hitting cost without a unique minimizer, ...).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A guarantee that holds by construction was observed broken. Maps to CLI
// exit code 3.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

// Bad configuration or file contents. Maps to CLI exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace erl
