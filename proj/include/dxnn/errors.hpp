#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dxnn {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed snapshot text. `line` is 1-based.
struct ParseError : std::runtime_error {
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line(line) {}
  std::size_t line;
};

/// A snapshot record names an element that does not exist.
struct ReferenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RoutingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Wrong sensor set or vector shape handed to a phenotype or environment.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MutationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Selection cannot proceed (every fitness is zero).
struct DegeneratePopulation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dxnn
