#pragma once

#include <stdexcept>
#include <string>

namespace opo {

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input outside the domain of an operation: validity windows, type invariants,
/// physically impossible parameter combinations.
class DomainError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure could not produce a result (no root, too few counts, ...).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A configured resource limit would be exceeded.
class ResourceError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  ConfigError(int line, const std::string& message)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

  /// 1-based line number, 0 when the error is not tied to a line.
  int line() const noexcept { return line_; }

private:
  int line_;
};

} // namespace opo
