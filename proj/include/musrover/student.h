// The student: constrained entropy maximization over the raw simplex.

#ifndef MUSROVER_STUDENT_H
#define MUSROVER_STUDENT_H

#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "musrover/corpus.h"
#include "musrover/dist.h"
#include "musrover/features.h"

namespace musrover {

/// tsallis2 maximizes 1 - Σp² (minimum-norm projection); shannon maximizes -Σp log p.
enum class Objective { kTsallis2, kShannon };

std::string_view objectiveName(Objective objective);
Objective parseObjective(std::string_view name);

struct SolverOptions {
  Objective objective = Objective::kTsallis2;
  double tol = 1e-8;
  int max_sweeps = 10000;
};

/// Affine cell-mass equality: Σ_{x : cell_of[x] = c} p[x] = target[c].
struct CellConstraint {
  std::span<const std::int32_t> cell_of;
  std::span<const double> target;
};

struct SolveResult {
  std::vector<double> p;
  double residual = 0.0;  ///< max cell-mass violation over all constraints
  int sweeps = 0;
  bool converged = true;
};

/// Euclidean projection onto one cell-mass constraint: every coordinate of
/// cell c moves by (target[c] - mass[c]) / |c|.
std::vector<double> projectOntoPartitionConstraint(std::span<const double> p,
                                                   const CellConstraint& constraint);

/// Euclidean projection onto {x >= 0, Σx = 1}.
std::vector<double> projectOntoSimplex(std::span<const double> v);

double maxViolation(std::span<const double> p, std::span<const CellConstraint> constraints);

/// Maximizes the objective over the simplex subject to all constraints.
///
/// Without a start point tsallis2 projects the origin (Dykstra's algorithm,
/// constraints in order then the simplex) and shannon scales from the uniform
/// distribution (iterative proportional fitting). A start point turns both into
/// "closest feasible point to start" in the objective's geometry.
/// Coordinates lying in any zero-target cell are pinned to zero up front.
/// Throws InfeasibleConstraintError when a positive target has no free support.
SolveResult solveConstrained(std::size_t n, std::span<const CellConstraint> constraints,
                             const SolverOptions& options,
                             std::span<const double> start = {},
                             bool stop_on_stall = false);

struct PrioritizedSolve {
  SolveResult result;
  std::vector<bool> accepted;
};

/// Solves with every constraint if that is feasible; otherwise admits
/// constraints greedily in order, skipping any that conflicts with those
/// already admitted.
PrioritizedSolve solvePrioritized(std::size_t n, std::span<const CellConstraint> constraints,
                                  const SolverOptions& options,
                                  std::span<const double> start = {});

/// A learned unigram rule r = (feature, target).
struct Rule {
  Feature feature;
  Dist target;
  int learned_at = 0;
};

/// A learned bigram rule: feature transition distribution p(value | context).
struct BigramRule {
  Feature feature;
  CondDist target;
  int learned_at = 0;
};

struct StudentModel {
  enum class Kind { kUnigram, kBigram };

  Kind kind = Kind::kUnigram;
  Omega omega;
  SolverOptions options;
  /// Unigram solution; for bigram students, the first-column and fallback model.
  std::vector<double> p;
  /// Bigram families: one distribution per group of contexts sharing constraints.
  std::vector<std::vector<double>> group_p;
  /// (context omega index, group), sorted by context.
  std::vector<std::pair<std::size_t, std::size_t>> context_group;
  double residual = 0.0;
  int sweeps = 0;
  bool converged = true;
  std::size_t dropped_constraints = 0;

  /// p(· | context), falling back to the unigram model for unseen contexts.
  std::span<const double> conditional(std::size_t context) const;
};

StudentModel solveStudentUnigram(const FeatureSpace& space, const std::vector<Rule>& rules,
                                 const SolverOptions& options);

/// Per observed context c, finds the distribution closest to init.p subject to
/// each bigram rule's row for the context's feature value, plus every unigram
/// rule whose feature has not been overwritten by a bigram rule.
StudentModel solveStudentBigram(const FeatureSpace& space,
                                const std::vector<std::size_t>& contexts,
                                const std::vector<BigramRule>& bigram_rules,
                                const std::vector<Rule>& unigram_rules,
                                const StudentModel& init, const SolverOptions& options);

/// Draws a sonority sequence; deterministic for a given seed.
std::vector<Sonority> sampleSequence(const StudentModel& model, std::size_t length,
                                     std::uint64_t seed);

}  // namespace musrover

#endif  // MUSROVER_STUDENT_H
