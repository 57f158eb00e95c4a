#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace vrcp {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Vector/matrix dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A numeric argument lies outside its domain (negative radius, NaN input, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration: wrong objective for the network, mismatched
/// norms, invalid experiment settings.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t epoch, const std::string& what)
      : Error(what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

/// Malformed tabular input. `line()` is 1-based and counts the header.
class DataError : public Error {
 public:
  /// `line` is 1-based; 0 means the error is not tied to a line.
  DataError(std::size_t line, const std::string& what)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace vrcp
