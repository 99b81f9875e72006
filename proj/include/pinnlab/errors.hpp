#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pinnlab {

struct InvalidArgument : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidPartition : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InvalidReference : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct UnknownCase : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Raised when a residual or gradient stops being finite. `point_index` is the
/// term index inside the offending point group (or the parameter index for
/// gradient checks).
class DivergedTraining : public std::runtime_error {
 public:
  DivergedTraining(const std::string& what, std::size_t point_index)
      : std::runtime_error(what), point_index_(point_index) {}
  std::size_t point_index() const noexcept { return point_index_; }

 private:
  std::size_t point_index_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace pinnlab
