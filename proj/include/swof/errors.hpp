#pragma once

#include <stdexcept>
#include <string>

namespace swof {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: configuration values, boundary setups, layouts.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// The scheme produced a state that violates its own invariants.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NegativeHeight : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Message-passing contract broken (tag mismatch, missing contribution).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

}  // namespace swof
