// Bigram learning phase seeded from the unigram student, and rule-book diffs.

#include "musrover/ngram.h"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "musrover/error.h"

namespace musrover {

namespace {

const std::size_t kRawIndex = featureIndex(rawFeature());

}  // namespace

BigramEmpirical computeBigramEmpirical(const FeatureSpace& space, const BigramCounts& pairs) {
  if (pairs.empty()) throw DataError("corpus has no adjacent column pairs");
  BigramEmpirical e;
  std::map<std::size_t, std::int64_t> outgoing;
  std::int64_t total = 0;
  for (const auto& [xy, n] : pairs) {
    outgoing[xy.first] += n;
    total += n;
  }
  for (const auto& [c, n] : outgoing) {
    e.contexts.push_back(c);
    e.context_weights.push_back(static_cast<double>(n) / static_cast<double>(total));
  }

  const std::size_t count = enumerateFeatures().size();
  e.cond.resize(count);
  e.cond_entropy.assign(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    if (i == kRawIndex) continue;
    e.cond[i] = empiricalBigram(pairs, space.omega(), space.partition(i));
    e.cond_entropy[i] = conditionalEntropy(e.cond[i]);
  }

  // Raw rows stay sparse: H(next | previous sonority).
  double h = 0.0;
  auto it = pairs.begin();
  while (it != pairs.end()) {
    const std::size_t c = it->first.first;
    const auto n_c = static_cast<double>(outgoing[c]);
    double row_h = 0.0;
    for (; it != pairs.end() && it->first.first == c; ++it) {
      const double q = static_cast<double>(it->second) / n_c;
      row_h -= q * std::log(q);
    }
    h += n_c / static_cast<double>(total) * row_h;
  }
  e.cond_entropy[kRawIndex] = std::max(h, 0.0);
  return e;
}

CondDist studentConditional(const FeatureSpace& space, const BigramEmpirical& empirical,
                            const StudentModel& student, std::size_t feature_index) {
  if (feature_index == kRawIndex) {
    throw DataError("studentConditional: the raw feature is handled sparsely");
  }
  const CondDist& phat = empirical.cond[feature_index];
  const Partition& partition = space.partition(feature_index);
  CondDist out;
  out.alphabet = phat.alphabet;
  out.contexts = phat.contexts;
  out.weights = phat.weights;
  out.rows.assign(phat.contexts.size(), std::vector<double>(phat.alphabet.size(), 0.0));
  std::vector<double> mixed_weight(phat.contexts.size(), 0.0);

  std::map<const double*, std::vector<double>> pushed;
  for (std::size_t k = 0; k < empirical.contexts.size(); ++k) {
    const std::size_t c = empirical.contexts[k];
    const FeatureValue a = applyFeature(partition.feature(), space.omega().decode(c));
    auto pos = std::lower_bound(phat.contexts.begin(), phat.contexts.end(), a);
    const auto r = static_cast<std::size_t>(pos - phat.contexts.begin());
    std::span<const double> p = student.conditional(c);
    auto [slot, inserted] = pushed.try_emplace(p.data());
    if (inserted) slot->second = space.pushforward(p, feature_index);
    const double w = empirical.context_weights[k];
    for (std::size_t v = 0; v < out.alphabet.size(); ++v) out.rows[r][v] += w * slot->second[v];
    mixed_weight[r] += w;
  }
  for (std::size_t r = 0; r < out.rows.size(); ++r) {
    if (mixed_weight[r] <= 0.0) continue;
    for (double& m : out.rows[r]) m /= mixed_weight[r];
  }
  return out;
}

std::vector<double> bigramFootprint(const FeatureSpace& space, const BigramEmpirical& empirical,
                                    const BigramCounts& pairs, const StudentModel& student) {
  const std::size_t count = enumerateFeatures().size();
  std::vector<double> gaps(count, 0.0);
  for (std::size_t i = 0; i < count; ++i) {
    if (i == kRawIndex) continue;
    gaps[i] = conditionalKl(empirical.cond[i],
                            studentConditional(space, empirical, student, i));
  }

  std::int64_t total = 0;
  for (const auto& [xy, n] : pairs) total += n;
  double gap = 0.0;
  auto it = pairs.begin();
  while (it != pairs.end() && !std::isinf(gap)) {
    const std::size_t c = it->first.first;
    std::int64_t n_c = 0;
    for (auto j = it; j != pairs.end() && j->first.first == c; ++j) n_c += j->second;
    std::span<const double> p = student.conditional(c);
    double row = 0.0;
    for (; it != pairs.end() && it->first.first == c; ++it) {
      const double q = static_cast<double>(it->second) / static_cast<double>(n_c);
      const double s = p[it->first.second];
      if (s <= 0.0) {
        row = kInfinity;
        break;
      }
      row += q * std::log(q / s);
    }
    gap += static_cast<double>(n_c) / static_cast<double>(total) * row;
  }
  gaps[kRawIndex] = std::isinf(gap) ? kInfinity : std::max(gap, 0.0);
  return gaps;
}

BigramResult runBigramLoop(const CorpusModel& corpus, const UnigramResult& unigram,
                           const LoopConfig& cfg) {
  FeatureSpace space(corpus.omega);
  Empirical empirical = computeEmpirical(corpus, space, cfg.merge_repeats);
  BigramEmpirical bigram = computeBigramEmpirical(space, empirical.stream.bigram);
  return runBigramLoop(space, empirical, bigram, unigram, cfg);
}

BigramResult runBigramLoop(const FeatureSpace& space, const Empirical& empirical,
                           const BigramEmpirical& bigram, const UnigramResult& unigram,
                           const LoopConfig& cfg) {
  validateConfig(cfg);
  if (unigram.student.kind != StudentModel::Kind::kUnigram) {
    throw DataError("bigram phase must start from a unigram student");
  }
  BigramResult result;
  Trace& trace = result.trace;
  trace.phase = Phase::kBigram;
  trace.config = cfg;
  trace.corpus_fingerprint = unigram.trace.corpus_fingerprint;

  const auto& pairs = empirical.stream.bigram;
  auto solve = [&] {
    return solveStudentBigram(space, bigram.contexts, result.rules, unigram.rules,
                              unigram.student, cfg.solver);
  };
  auto record = [&] {
    std::vector<double> footprint = bigramFootprint(space, bigram, pairs, result.student);
    trace.gap_history.push_back(footprint[kRawIndex]);
    trace.footprints.push_back(std::move(footprint));
  };

  const auto& features = enumerateFeatures();
  std::vector<bool> learned(features.size(), false);
  learned[kRawIndex] = true;
  result.student = solve();
  record();

  const TeacherOptions teacher{cfg.alpha, cfg.normalize_by_log_range};
  for (int k = 1;; ++k) {
    if (trace.gap_history.back() < cfg.epsilon) {
      trace.stop_reason = "epsilon";
      break;
    }
    if (k > cfg.max_iters) {
      trace.stop_reason = "max_iters";
      break;
    }
    std::vector<CandidateMeasures> candidates;
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (learned[i]) continue;
      candidates.push_back({i, trace.footprints.back()[i], bigram.cond_entropy[i],
                            space.partition(i).cellCount()});
    }
    auto selection = selectCandidate(candidates, teacher);
    if (!selection) {
      trace.stop_reason = "exhausted";
      break;
    }
    const ScoredCandidate pick = selection->scored[selection->chosen];
    const std::size_t index = featureIndex(pick.feature);
    trace.candidate_scores.push_back(std::move(selection->scored));

    learned[index] = true;
    result.rules.push_back({pick.feature, bigram.cond[index], k});
    trace.rules.push_back({pick.feature, k, pick.kl, pick.entropy, pick.score, Dist{},
                           bigram.cond[index]});
    if (std::any_of(unigram.rules.begin(), unigram.rules.end(),
                    [&](const Rule& r) { return r.feature == pick.feature; })) {
      result.overwritten.push_back(pick.feature);
    }
    result.student = solve();
    record();
  }
  return result;
}

DiffReport diffRulebooks(const RuleBook& unigram_book, const RuleBook& bigram_book,
                         double threshold) {
  DiffReport report;
  report.threshold = threshold;
  for (const BigramEntry& b : bigram_book.bigram) {
    auto u = std::find_if(unigram_book.unigram.begin(), unigram_book.unigram.end(),
                          [&](const UnigramEntry& e) { return e.feature == b.feature; });
    if (u == unigram_book.unigram.end()) {
      throw DataError("unigram book has no entry for '" + b.feature.str() + "'");
    }
    if (u->dist.alphabet != b.dist.alphabet) {
      throw DataError("unigram and bigram alphabets differ for '" + b.feature.str() + "'");
    }
    for (std::size_t r = 0; r < b.dist.contexts.size(); ++r) {
      for (std::size_t v = 0; v < b.dist.alphabet.size(); ++v) {
        const double pu = u->dist.mass[v];
        const double pb = b.dist.rows[r][v];
        if (std::abs(pb - pu) <= threshold) continue;
        double ratio = pb <= 0.0 ? -kInfinity : (pu <= 0.0 ? kInfinity : std::log(pb / pu));
        report.entries.push_back({b.feature, b.dist.contexts[r], b.dist.alphabet[v], pu, pb, ratio});
      }
    }
  }
  std::stable_sort(report.entries.begin(), report.entries.end(),
                   [](const DiffEntry& a, const DiffEntry& b) {
                     return std::abs(a.bigram_p - a.unigram_p) > std::abs(b.bigram_p - b.unigram_p);
                   });
  return report;
}

std::string renderDiffReport(const DiffReport& report) {
  std::string out = fmt::format("Bigram vs unigram differences (threshold {}):\n", report.threshold);
  if (report.entries.empty()) return out + "  (none)\n";
  for (const DiffEntry& e : report.entries) {
    out += fmt::format("  {} [{}]: {} -> {}: unigram {}, bigram {}, log-ratio {}\n",
                       describeFeature(e.feature), e.feature.str(), valueLabel(e.context),
                       valueLabel(e.value), formatProbability(e.unigram_p),
                       formatProbability(e.bigram_p),
                       std::isinf(e.log_ratio) ? (e.log_ratio < 0 ? "-inf" : "+inf")
                                               : fmt::format("{:.3f}", e.log_ratio));
  }
  return out;
}

}  // namespace musrover
