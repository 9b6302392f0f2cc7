// Empirical feature distributions and information measures (natural log).

#ifndef MUSROVER_DIST_H
#define MUSROVER_DIST_H

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "musrover/corpus.h"
#include "musrover/features.h"

namespace musrover {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Distribution over a feature's realizable values (zero-mass values kept).
struct Dist {
  std::vector<FeatureValue> alphabet;
  std::vector<double> mass;

  bool operator==(const Dist&) const = default;
};

/// Conditional distribution p(value | context value). Contexts are the feature
/// values with positive outgoing count; weights are their empirical frequencies.
struct CondDist {
  std::vector<FeatureValue> alphabet;
  std::vector<FeatureValue> contexts;
  std::vector<std::vector<double>> rows;
  std::vector<double> weights;

  /// Row for context value c, or nullptr.
  const std::vector<double>* row(const FeatureValue& c) const;
  bool operator==(const CondDist&) const = default;
};

Dist empiricalUnigram(const UnigramCounts& counts, const Omega& omega,
                      const Partition& partition);

CondDist empiricalBigram(const BigramCounts& pairs, const Omega& omega,
                         const Partition& partition);

double entropy(std::span<const double> p);
inline double entropy(const Dist& d) { return entropy(d.mass); }

/// Σ_c w(c) H(row_c).
double conditionalEntropy(const CondDist& d);

/// D(p ‖ q); kInfinity when p puts mass where q has none.
double klDivergence(std::span<const double> p, std::span<const double> q);
double klDivergence(const Dist& p, const Dist& q);

/// Σ_c w(c) D(phat_c ‖ pstud_c), weights taken from phat.
double conditionalKl(const CondDist& phat, const CondDist& pstud);

inline double toBits(double nats) { return nats / std::log(2.0); }

}  // namespace musrover

#endif  // MUSROVER_DIST_H
