#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace siegel {

// Base of every error thrown by the library. Callers that only care about
// "something went wrong" catch this; the CLI maps the subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidDigitError : public Error {
 public:
  using Error::Error;
};

// Empty period, rational input, or an expansion that never repeats.
class NotQuadraticError : public Error {
 public:
  using Error::Error;
};

// Continued-fraction text that does not follow `[a1,...;b1,...]`.
class CfParseError : public Error {
 public:
  CfParseError(const std::string& what, std::size_t offset)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class InsufficientPrecisionError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::uint64_t index)
      : Error(what + " (first non-finite iterate at index " + std::to_string(index) + ")"),
        index_(index) {}
  std::uint64_t index() const noexcept { return index_; }

 private:
  std::uint64_t index_;
};

class PrecisionExhaustedError : public Error {
 public:
  using Error::Error;
};

class TooFewLevelsError : public Error {
 public:
  using Error::Error;
};

class InsufficientSamplesError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Invalid analysis or render configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace siegel
