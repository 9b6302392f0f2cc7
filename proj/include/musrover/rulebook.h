// The rule book: every feature's empirical distribution plus learned bigram rules.

#ifndef MUSROVER_RULEBOOK_H
#define MUSROVER_RULEBOOK_H

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "musrover/dist.h"
#include "musrover/features.h"
#include "musrover/student.h"

namespace musrover {

struct Empirical;

struct UnigramEntry {
  Feature feature;
  Dist dist;
  double entropy = 0.0;  ///< nats

  bool operator==(const UnigramEntry&) const = default;
};

struct BigramEntry {
  Feature feature;
  CondDist dist;
  int learned_at = 0;
  double entropy = 0.0;  ///< weighted conditional entropy, nats

  bool operator==(const BigramEntry&) const = default;
};

struct RuleBook {
  std::string corpus_fingerprint;
  std::vector<UnigramEntry> unigram;  ///< all 63 features, canonical order
  std::vector<BigramEntry> bigram;    ///< learned order
  std::vector<std::string> traces;    ///< trace file names

  bool operator==(const RuleBook&) const = default;
};

RuleBook buildRuleBook(const std::string& fingerprint, const Empirical& empirical);

void addBigramRules(RuleBook& book, const std::vector<BigramRule>& rules);

std::string ruleBookToJson(const RuleBook& book);
/// Throws DataError on malformed documents.
RuleBook ruleBookFromJson(std::string_view text);

enum class RenderStyle { kFull, kTopK };

/// One-line interpretable statement: feature description plus its masses.
std::string renderRule(const Feature& feature, const Dist& dist,
                       RenderStyle style = RenderStyle::kTopK, std::size_t top_k = 5);

/// One line per context of a bigram rule.
std::string renderBigramRule(const Feature& feature, const CondDist& dist,
                             RenderStyle style = RenderStyle::kTopK, std::size_t top_k = 5);

/// Probability rendered with two decimals, or three below 0.1.
std::string formatProbability(double p);

}  // namespace musrover

#endif  // MUSROVER_RULEBOOK_H
