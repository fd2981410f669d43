#pragma once

#include <stdexcept>
#include <string>

namespace sphneedlet {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Structurally valid input that violates a data invariant (non-unit node, zero weight, shape mismatch).
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A numerical precondition such as insufficient quadrature degree.
struct PreconditionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sphneedlet
