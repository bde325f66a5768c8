#pragma once

#include <stdexcept>
#include <string>

namespace mzisim {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A domain object or argument violates its invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// The operation is not defined for the given spectral-model variant.
class UnsupportedModeError : public Error {
 public:
  using Error::Error;
};

/// Requested value is outside what the geometry can produce.
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Mutually exclusive arguments were both (or neither) supplied.
class UsageError : public Error {
 public:
  using Error::Error;
};

class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

/// Visibility line never crosses 1/e (slope >= 0 or intercept <= 1/e).
class NoCrossingError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class DataFormatError : public Error {
 public:
  DataFormatError(const std::string& what, std::size_t line = 0)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mzisim
