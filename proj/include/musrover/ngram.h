// Evolving n-grams: the bigram phase and bigram-vs-unigram comparison.

#ifndef MUSROVER_NGRAM_H
#define MUSROVER_NGRAM_H

#include <cstddef>
#include <string>
#include <vector>

#include "musrover/loop.h"
#include "musrover/rulebook.h"
#include "musrover/student.h"

namespace musrover {

/// Adjacent-pair statistics for every feature.
struct BigramEmpirical {
  std::vector<std::size_t> contexts;    ///< raw omega indices with outgoing pairs
  std::vector<double> context_weights;  ///< aligned with contexts
  std::vector<CondDist> cond;           ///< per feature; empty for the raw feature
  std::vector<double> cond_entropy;     ///< per feature
};

BigramEmpirical computeBigramEmpirical(const FeatureSpace& space, const BigramCounts& pairs);

/// The student's implied p_f(value | context value), mixing raw contexts by
/// their empirical weights. Contexts follow the empirical CondDist.
CondDist studentConditional(const FeatureSpace& space, const BigramEmpirical& empirical,
                            const StudentModel& student, std::size_t feature_index);

/// Conditional gaps of all 63 features.
std::vector<double> bigramFootprint(const FeatureSpace& space, const BigramEmpirical& empirical,
                                    const BigramCounts& pairs, const StudentModel& student);

struct BigramResult {
  Trace trace;
  StudentModel student;
  std::vector<BigramRule> rules;
  std::vector<Feature> overwritten;  ///< bigram features that replaced a unigram rule
};

BigramResult runBigramLoop(const CorpusModel& corpus, const UnigramResult& unigram,
                           const LoopConfig& cfg);
BigramResult runBigramLoop(const FeatureSpace& space, const Empirical& empirical,
                           const BigramEmpirical& bigram, const UnigramResult& unigram,
                           const LoopConfig& cfg);

struct DiffEntry {
  Feature feature;
  FeatureValue context;
  FeatureValue value;
  double unigram_p = 0.0;
  double bigram_p = 0.0;
  double log_ratio = 0.0;  ///< log(bigram / unigram); -inf when bigram_p is 0
};

struct DiffReport {
  double threshold = 0.05;
  std::vector<DiffEntry> entries;  ///< sorted by |bigram - unigram| descending
};

/// Lists (context, value) pairs of each bigram rule whose conditional differs
/// from the unigram marginal by more than threshold.
DiffReport diffRulebooks(const RuleBook& unigram_book, const RuleBook& bigram_book,
                         double threshold = 0.05);

std::string renderDiffReport(const DiffReport& report);

}  // namespace musrover

#endif  // MUSROVER_NGRAM_H
