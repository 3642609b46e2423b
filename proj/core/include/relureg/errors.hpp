#pragma once

#include <stdexcept>
#include <string>

// Error taxonomy shared by every module.  Configuration / input problems derive
// from ConfigError (CLI exit code 1), runtime numeric failures from NumericError
// (CLI exit code 2).

namespace relureg {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : ConfigError {
  using ConfigError::ConfigError;
};

struct InvalidSpec : ConfigError {
  using ConfigError::ConfigError;
};

struct IoError : ConfigError {
  using ConfigError::ConfigError;
};

struct ParseError : ConfigError {
  ParseError(const std::string& what, long line)
      : ConfigError(what + " (line " + std::to_string(line) + ")"), line(line) {}
  long line;
};

struct EmptyTrace : ConfigError {
  using ConfigError::ConfigError;
};

struct ZeroDirection : ConfigError {
  using ConfigError::ConfigError;
};

struct EmptyRegion : ConfigError {
  using ConfigError::ConfigError;
};

struct SizeOverflow : ConfigError {
  using ConfigError::ConfigError;
};

struct DegreeOverflow : ConfigError {
  using ConfigError::ConfigError;
};

struct NoConvergence : NumericError {
  using NumericError::NumericError;
};

}  // namespace relureg
