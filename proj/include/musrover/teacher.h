// The teacher: scores unlearned features and proposes the next rule.

#ifndef MUSROVER_TEACHER_H
#define MUSROVER_TEACHER_H

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "musrover/dist.h"
#include "musrover/features.h"

namespace musrover {

struct ScoredCandidate {
  Feature feature;
  double kl = 0.0;       ///< nats; kInfinity if the student misses empirical support
  double entropy = 0.0;  ///< nats
  double score = 0.0;
};

struct TeacherOptions {
  double alpha = 0.5;
  /// Divide KL and entropy by log|alphabet| before scoring.
  bool normalize_by_log_range = false;
};

/// s = alpha * kl - (1 - alpha) * entropy. An infinite kl scores +inf for alpha > 0.
double scoreFromMeasures(double kl, double entropy, double alpha);

/// Score of one feature given its empirical and student distributions.
double scoreFeature(std::span<const double> phat, std::span<const double> pstud, double alpha);

/// Per-candidate measures supplied by the loop, in canonical feature order.
struct CandidateMeasures {
  std::size_t feature_index = 0;
  double kl = 0.0;
  double entropy = 0.0;
  std::size_t alphabet_size = 1;
};

struct Selection {
  std::vector<ScoredCandidate> scored;  ///< every candidate, in canonical order
  std::size_t chosen = 0;               ///< index into scored
};

/// Picks the maximum score; ties go to the earliest candidate in canonical order.
/// Returns nullopt when there are no candidates.
std::optional<Selection> selectCandidate(std::span<const CandidateMeasures> candidates,
                                         const TeacherOptions& options);

}  // namespace musrover

#endif  // MUSROVER_TEACHER_H
