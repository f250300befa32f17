#pragma once

#include <stdexcept>
#include <string>

namespace isobenefit {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid grid dimensions or cell size.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter value (negative distance, non-positive speed, ...).
class ParamError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input. Carries a 1-based line/column position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(msg + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Bad run configuration (unknown key, missing required key, inconsistent values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A simulation configuration that cannot be satisfied (e.g. the grid cannot
/// host the required nature block). The message names the binding constraint.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// Filesystem / stream failure.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace isobenefit
