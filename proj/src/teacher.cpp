// Rule selection by regularity/discriminativeness scoring.

#include "musrover/teacher.h"

#include <algorithm>
#include <cmath>

namespace musrover {

namespace {

constexpr double kTieTolerance = 1e-12;

}  // namespace

double scoreFromMeasures(double kl, double entropy, double alpha) {
  if (std::isinf(kl)) return alpha > 0.0 ? kInfinity : -entropy;
  return alpha * kl - (1.0 - alpha) * entropy;
}

double scoreFeature(std::span<const double> phat, std::span<const double> pstud, double alpha) {
  return scoreFromMeasures(klDivergence(phat, pstud), entropy(phat), alpha);
}

std::optional<Selection> selectCandidate(std::span<const CandidateMeasures> candidates,
                                         const TeacherOptions& options) {
  if (candidates.empty()) return std::nullopt;
  Selection sel;
  const auto& features = enumerateFeatures();
  for (const CandidateMeasures& c : candidates) {
    double kl = c.kl;
    double h = c.entropy;
    if (options.normalize_by_log_range && c.alphabet_size > 1) {
      const double range = std::log(static_cast<double>(c.alphabet_size));
      kl /= range;
      h /= range;
    }
    sel.scored.push_back({features[c.feature_index], c.kl, c.entropy,
                          scoreFromMeasures(kl, h, options.alpha)});
  }
  // Scores within rounding noise of the incumbent count as ties, which the earlier
  // candidate wins.
  for (std::size_t i = 1; i < sel.scored.size(); ++i) {
    const double best = sel.scored[sel.chosen].score;
    const double margin = std::isinf(best) ? 0.0 : kTieTolerance * std::max(1.0, std::abs(best));
    if (sel.scored[i].score > best + margin) sel.chosen = i;
  }
  return sel;
}

}  // namespace musrover
