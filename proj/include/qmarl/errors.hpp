#pragma once

#include <stdexcept>
#include <string>

namespace qmarl {

// Base for every error raised by the library. Subclasses name the contract
// that was violated so callers (and the CLI) can report a useful category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid sizes, budgets or settings supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed gate or circuit description.
class SpecError : public Error {
 public:
  using Error::Error;
};

// Input that does not fit the encoding register.
class EncodingError : public Error {
 public:
  using Error::Error;
};

// NaN / inf where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Shape or precondition mismatch between cooperating values.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Text input (config, scenario, snapshot, metrics) that could not be read.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace qmarl
