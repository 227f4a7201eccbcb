#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fvc {

/// Root of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Size or count outside the supported range.
class LimitError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions that do not match the problem.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in a DSL expression, located by byte offset.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& what)
      : Error("parse error at offset " + std::to_string(offset) + ": " + what),
        offset_(offset),
        expected_(std::move(expected)) {}

  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t offset_;
  std::vector<std::string> expected_;
};

/// Floating-point evaluation left the domain of a DSL function.
class EvalError : public Error {
 public:
  EvalError(std::size_t offset, const std::string& what)
      : Error("evaluation error at offset " + std::to_string(offset) + ": " + what),
        offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Trajectory or variation violates the boundary data of a problem.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Pointwise second-order data requested at a jump of the Caputo derivative.
class JumpPointError : public Error {
 public:
  using Error::Error;
};

/// Mean-value bump requested with a constant shape function.
class DegenerateBump : public Error {
 public:
  using Error::Error;
};

/// Endpoint/transversality linear system without a unique solution.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// Malformed trajectory file.
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration; carries 1-based line and column.
class ConfigError : public Error {
 public:
  ConfigError(int line, int column, const std::string& what)
      : Error("config error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace fvc
