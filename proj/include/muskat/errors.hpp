#pragma once

#include <stdexcept>
#include <string>

namespace muskat {

// Numerical failure inside a solver loop: divergence, non-convergence,
// degenerate geometry. Distinct from std::invalid_argument, which is used
// for precondition violations detectable from the arguments alone.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Configuration file syntax or validation problem. line/column are 1-based
// and -1 when not applicable (e.g. semantic validation errors).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg, int line = -1, int column = -1)
      : std::runtime_error(msg), line_(line), column_(column) {}
  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace muskat
