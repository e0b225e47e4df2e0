#pragma once

#include <stdexcept>
#include <string>

namespace moltrack {

// Base class for all solver-side failures.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// State outside the law's admissible set (e.g. nonpositive density).
struct AdmissibilityError : SolverError {
  int component;
  AdmissibilityError(const std::string& msg, int comp)
      : SolverError(msg), component(comp) {}
};

// Mapping Jacobian determinant nonpositive where positivity is required.
struct InvertedElementError : SolverError {
  int element;
  explicit InvertedElementError(const std::string& msg, int elem = -1)
      : SolverError(msg), element(elem) {}
};

// Jump across a tracked face too small for a Rankine-Hugoniot speed.
struct DegenerateJumpError : SolverError {
  using SolverError::SolverError;
};

struct UntanglingFailureError : SolverError {
  int element;
  UntanglingFailureError(const std::string& msg, int elem)
      : SolverError(msg), element(elem) {}
};

struct SetupError : SolverError {
  using SolverError::SolverError;
};

struct LinearSolverError : SolverError {
  using SolverError::SolverError;
};

struct StepFailureError : SolverError {
  using SolverError::SolverError;
};

struct TableauInconsistencyError : SolverError {
  using SolverError::SolverError;
};

struct InadmissibleStateError : SolverError {
  using SolverError::SolverError;
};

// Configuration file problems; line < 0 means not tied to a specific line.
struct ConfigError : std::runtime_error {
  int line;
  explicit ConfigError(const std::string& msg, int line_no = -1)
      : std::runtime_error(msg), line(line_no) {}
};

}  // namespace moltrack
