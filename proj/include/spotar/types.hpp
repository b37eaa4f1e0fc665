#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace spotar {

// Travel times are integers in abstract time units (seconds, minutes, ...).
// Every time handled by the engine is a multiple of the network resolution.
using Time = std::int64_t;

inline constexpr Time kInfiniteTime = std::numeric_limits<Time>::max() / 4;

enum class NodeId : std::uint32_t {};
enum class EdgeId : std::uint32_t {};

constexpr std::uint32_t index_of(NodeId n) { return static_cast<std::uint32_t>(n); }
constexpr std::uint32_t index_of(EdgeId e) { return static_cast<std::uint32_t>(e); }

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

// Overlapping stored joints share no overlap values, so overlap fusion has no mass.
class InconsistentWeightsError : public Error {
 public:
  using Error::Error;
};

class EnumerationLimitError : public Error {
 public:
  using Error::Error;
};

}  // namespace spotar
