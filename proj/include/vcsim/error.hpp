#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vcsim {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameters or inconsistent inputs (bad bounds, n_core > RSUs...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite or otherwise out-of-domain numeric input.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DuplicateStateError : public ParseError {
 public:
  using ParseError::ParseError;
};

class BoundsError : public ParseError {
 public:
  using ParseError::ParseError;
};

class MissingDelayError : public Error {
 public:
  using Error::Error;
};

class RoutingError : public Error {
 public:
  using Error::Error;
};

/// Placement refinement ran out of unvisited configurations.
class ExhaustedError : public Error {
 public:
  using Error::Error;
};

}  // namespace vcsim
