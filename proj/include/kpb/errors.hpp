#pragma once

#include <stdexcept>
#include <string>

namespace kpb {

// Base for everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid parameters or configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed, degenerate or mismatched data (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

// Solver or numeric failures (CLI exit code 4).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace kpb
