// Unigram self-learning loop and trace metrics.

#include "musrover/loop.h"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "musrover/error.h"

namespace musrover {

namespace {

const std::size_t kRawIndex = featureIndex(rawFeature());

void recordIteration(Trace& trace, std::vector<double> footprint) {
  trace.gap_history.push_back(footprint[kRawIndex]);
  trace.footprints.push_back(std::move(footprint));
}

StudentModel solveOrThrow(const FeatureSpace& space, const std::vector<Rule>& rules,
                          const SolverOptions& options) {
  StudentModel student = solveStudentUnigram(space, rules, options);
  if (!student.converged) {
    throw SolverError(fmt::format(
        "student did not converge after {} sweeps with {} rules (residual {:.3g})",
        student.sweeps, rules.size(), student.residual));
  }
  return student;
}

UnigramResult runLoop(const FeatureSpace& space, const Empirical& empirical,
                      const std::string& fingerprint, const LoopConfig& cfg,
                      const std::vector<Feature>* forced) {
  validateConfig(cfg);
  UnigramResult result;
  Trace& trace = result.trace;
  trace.phase = Phase::kUnigram;
  trace.config = cfg;
  trace.corpus_fingerprint = fingerprint;

  const auto& features = enumerateFeatures();
  std::vector<bool> learned(features.size(), false);
  learned[kRawIndex] = true;

  result.student = solveOrThrow(space, result.rules, cfg.solver);
  recordIteration(trace, unigramFootprint(space, empirical, result.student.p));

  const TeacherOptions teacher{cfg.alpha, cfg.normalize_by_log_range};
  for (int k = 1;; ++k) {
    if (trace.gap_history.back() < cfg.epsilon) {
      trace.stop_reason = "epsilon";
      break;
    }
    if (k > cfg.max_iters || (forced && static_cast<std::size_t>(k) > forced->size())) {
      trace.stop_reason = "max_iters";
      break;
    }
    std::vector<CandidateMeasures> candidates;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (learned[i]) continue;
      candidates.push_back({i, trace.footprints.back()[i], empirical.entropy[i],
                            space.partition(i).cellCount()});
    }
    auto selection = selectCandidate(candidates, teacher);
    if (!selection) {
      trace.stop_reason = "exhausted";
      break;
    }
    std::size_t chosen = selection->chosen;
    if (forced) {
      const Feature& want = (*forced)[k - 1];
      auto it = std::find_if(selection->scored.begin(), selection->scored.end(),
                             [&](const ScoredCandidate& c) { return c.feature == want; });
      if (it == selection->scored.end()) {
        throw DataError("replayed feature '" + want.str() + "' is raw or already learned");
      }
      chosen = static_cast<std::size_t>(it - selection->scored.begin());
    }
    const ScoredCandidate pick = selection->scored[chosen];
    const std::size_t index = featureIndex(pick.feature);
    trace.candidate_scores.push_back(std::move(selection->scored));

    learned[index] = true;
    result.rules.push_back({pick.feature, empirical.unigram[index], k});
    trace.rules.push_back({pick.feature, k, pick.kl, pick.entropy, pick.score,
                           empirical.unigram[index], std::nullopt});

    result.student = solveOrThrow(space, result.rules, cfg.solver);
    recordIteration(trace, unigramFootprint(space, empirical, result.student.p));
  }
  return result;
}

}  // namespace

void validateConfig(const LoopConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw DataError(fmt::format("alpha {} is outside [0,1]", cfg.alpha));
  }
  if (!(cfg.epsilon > 0.0)) throw DataError("epsilon must be positive");
  if (cfg.max_iters < 0 || cfg.max_iters > 62) {
    throw DataError(fmt::format("max_iters {} is outside [0,62]", cfg.max_iters));
  }
  if (!(cfg.solver.tol > 0.0)) throw DataError("solver tolerance must be positive");
  if (cfg.solver.max_sweeps < 1) throw DataError("max_sweeps must be at least 1");
}

Empirical computeEmpirical(const CorpusModel& corpus, const FeatureSpace& space,
                           bool merge_repeats) {
  Empirical e;
  e.stream = sonorityStream(corpus, merge_repeats);
  std::int64_t total = 0;
  for (const auto& [x, n] : e.stream.unigram) total += n;
  e.raw.assign(space.omega().size(), 0.0);
  for (const auto& [x, n] : e.stream.unigram) {
    e.raw[x] = static_cast<double>(n) / static_cast<double>(total);
  }
  for (std::size_t i = 0; i < enumerateFeatures().size(); ++i) {
    e.unigram.push_back(empiricalUnigram(e.stream.unigram, space.omega(), space.partition(i)));
    e.entropy.push_back(entropy(e.unigram.back()));
  }
  return e;
}

UnigramResult runUnigramLoop(const CorpusModel& corpus, const LoopConfig& cfg) {
  FeatureSpace space(corpus.omega);
  Empirical empirical = computeEmpirical(corpus, space, cfg.merge_repeats);
  return runUnigramLoop(space, empirical, corpus.fingerprint, cfg);
}

UnigramResult runUnigramLoop(const FeatureSpace& space, const Empirical& empirical,
                             const std::string& fingerprint, const LoopConfig& cfg) {
  return runLoop(space, empirical, fingerprint, cfg, nullptr);
}

UnigramResult replayUnigramTrace(const FeatureSpace& space, const Empirical& empirical,
                                 const std::string& fingerprint, const LoopConfig& cfg,
                                 const std::vector<Feature>& order) {
  LoopConfig replay = cfg;
  replay.max_iters = static_cast<int>(order.size());
  UnigramResult result = runLoop(space, empirical, fingerprint, replay, &order);
  result.trace.config = cfg;
  return result;
}

double computeGap(const FeatureSpace& space, const StudentModel& student,
                  const Dist& empirical, const Feature& f) {
  const std::size_t index = featureIndex(f);
  if (empirical.alphabet != space.partition(index).values()) {
    throw DataError("empirical distribution does not match feature '" + f.str() + "'");
  }
  return klDivergence(empirical.mass, space.pushforward(student.p, index));
}

std::vector<double> unigramFootprint(const FeatureSpace& space, const Empirical& empirical,
                                     std::span<const double> student) {
  std::vector<double> gaps(enumerateFeatures().size());
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    gaps[i] = klDivergence(empirical.unigram[i].mass, space.pushforward(student, i));
  }
  return gaps;
}

std::optional<int> efficiency(std::span<const double> gap_history, double epsilon) {
  for (std::size_t n = 0; n < gap_history.size(); ++n) {
    if (gap_history[n] < epsilon) return static_cast<int>(n);
  }
  return std::nullopt;
}

double memorability(std::span<const double> rule_entropies, std::optional<int> efficiency) {
  std::size_t n = rule_entropies.size();
  if (efficiency) n = std::min(n, static_cast<std::size_t>(*efficiency));
  if (n == 0) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += rule_entropies[i];
  return sum / static_cast<double>(n);
}

double memorability(const Trace& trace, double epsilon) {
  std::vector<double> entropies;
  for (const TraceRule& r : trace.rules) entropies.push_back(r.entropy);
  return memorability(entropies, efficiency(trace, epsilon));
}

std::vector<EntanglementEntry> entanglementReport(const Trace& trace, double epsilon) {
  std::vector<EntanglementEntry> report;
  for (const TraceRule& r : trace.rules) {
    EntanglementEntry entry{r.feature, r.learned_at, std::nullopt, false};
    const std::size_t index = featureIndex(r.feature);
    for (std::size_t j = 0; j < trace.footprints.size(); ++j) {
      if (trace.footprints[j][index] >= epsilon) continue;
      if (!entry.crossing) entry.crossing = static_cast<int>(j);
      // A gap already closed by the unconstrained student is not implied by earlier rules.
      if (j >= 1 && static_cast<int>(j) < r.learned_at) entry.entangled = true;
    }
    report.push_back(entry);
  }
  return report;
}

}  // namespace musrover
