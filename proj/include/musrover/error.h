// Error types shared across the rule-induction engine.

#ifndef MUSROVER_ERROR_H
#define MUSROVER_ERROR_H

#include <stdexcept>
#include <string>

namespace musrover {

/// Malformed or invalid input data (corpus, feature strings, artifacts).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A constraint whose target puts mass on an empty (or fully excluded) cell.
class InfeasibleConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The student solver hit its sweep budget without meeting tolerance.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace musrover

#endif  // MUSROVER_ERROR_H
