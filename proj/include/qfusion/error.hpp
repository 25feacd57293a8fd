#pragma once

#include <stdexcept>
#include <string>

namespace qfusion {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A circuit or DAG references an unknown gate, an out-of-range wire, or
/// otherwise breaks a structural invariant.
class InvalidCircuitError : public Error {
 public:
  using Error::Error;
};

/// Simulation request exceeds the configured qubit cap.
class QubitBoundError : public Error {
 public:
  using Error::Error;
};

/// A parametric gate was simulated without a bound angle.
class MissingParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. `line()` is 1-based, 0 when not line-oriented.
class FormatError : public Error {
 public:
  FormatError(std::size_t line, const std::string& what)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qfusion
