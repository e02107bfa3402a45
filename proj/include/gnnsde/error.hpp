#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gnnsde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied invalid input (bad config, precondition violation,
/// malformed file). The CLI maps this family to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public ValidationError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Predecessor walk revisited a node (the distance field induced a cycle).
class RoutingError : public Error {
 public:
  RoutingError(std::uint32_t node, const std::string& what) : Error(what), node_(node) {}

  std::uint32_t repeated_node() const noexcept { return node_; }

 private:
  std::uint32_t node_;
};

/// Predecessor walk hit a node without a predecessor before reaching the source.
class UnreachableError : public Error {
 public:
  using Error::Error;
};

}  // namespace gnnsde
