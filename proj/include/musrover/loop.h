// The self-learning loop: traces, gap footprints, efficiency and memorability.

#ifndef MUSROVER_LOOP_H
#define MUSROVER_LOOP_H

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "musrover/corpus.h"
#include "musrover/dist.h"
#include "musrover/features.h"
#include "musrover/student.h"
#include "musrover/teacher.h"

namespace musrover {

struct LoopConfig {
  double alpha = 0.5;
  double epsilon = 0.005;
  int max_iters = 20;
  SolverOptions solver;
  bool merge_repeats = false;
  bool normalize_by_log_range = false;
};

/// Throws DataError if a field is out of its domain.
void validateConfig(const LoopConfig& cfg);

enum class Phase { kUnigram, kBigram };

struct TraceRule {
  Feature feature;
  int learned_at = 0;
  double kl = 0.0;       ///< gap of the feature just before it was learned
  double entropy = 0.0;  ///< empirical (conditional) entropy of the target
  double score = 0.0;
  Dist target;                          ///< unigram phase
  std::optional<CondDist> cond_target;  ///< bigram phase
};

/// An ordered rule-learning trace. Iteration j = 0 is the student before any
/// rule of this phase; rule k is learned at iteration k.
struct Trace {
  Phase phase = Phase::kUnigram;
  LoopConfig config;
  std::string corpus_fingerprint;
  std::vector<TraceRule> rules;
  std::vector<double> gap_history;
  /// footprints[j][i]: gap of feature i (canonical order) at iteration j.
  std::vector<std::vector<double>> footprints;
  /// Candidate scores seen by the teacher at iteration j + 1.
  std::vector<std::vector<ScoredCandidate>> candidate_scores;
  std::string stop_reason;
};

/// Corpus statistics shared by both phases.
struct Empirical {
  SonorityStream stream;
  std::vector<double> raw;       ///< empirical distribution over omega
  std::vector<Dist> unigram;     ///< per feature, canonical order
  std::vector<double> entropy;   ///< per feature
};

Empirical computeEmpirical(const CorpusModel& corpus, const FeatureSpace& space,
                           bool merge_repeats);

struct UnigramResult {
  Trace trace;
  StudentModel student;
  std::vector<Rule> rules;
};

UnigramResult runUnigramLoop(const CorpusModel& corpus, const LoopConfig& cfg);
UnigramResult runUnigramLoop(const FeatureSpace& space, const Empirical& empirical,
                             const std::string& fingerprint, const LoopConfig& cfg);

/// Rebuilds a unigram trace with a fixed rule order instead of teacher choices.
/// Candidate scores are still recorded.
UnigramResult replayUnigramTrace(const FeatureSpace& space, const Empirical& empirical,
                                 const std::string& fingerprint, const LoopConfig& cfg,
                                 const std::vector<Feature>& order);

/// D(empirical_f ‖ pushforward(student, f)).
double computeGap(const FeatureSpace& space, const StudentModel& student,
                  const Dist& empirical, const Feature& f);

/// Gaps of all 63 features.
std::vector<double> unigramFootprint(const FeatureSpace& space, const Empirical& empirical,
                                     std::span<const double> student);

/// First iteration n with gap^n < epsilon; nullopt stands for ∞.
std::optional<int> efficiency(std::span<const double> gap_history, double epsilon);
inline std::optional<int> efficiency(const Trace& trace, double epsilon) {
  return efficiency(trace.gap_history, epsilon);
}

/// Mean target entropy of the first min(k, E) rules.
double memorability(std::span<const double> rule_entropies, std::optional<int> efficiency);
double memorability(const Trace& trace, double epsilon);

struct EntanglementEntry {
  Feature feature;
  int learned_at = 0;
  std::optional<int> crossing;  ///< first iteration with feature gap < epsilon
  bool entangled = false;
};

std::vector<EntanglementEntry> entanglementReport(const Trace& trace, double epsilon);

}  // namespace musrover

#endif  // MUSROVER_LOOP_H
