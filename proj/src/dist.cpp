// Empirical estimation, entropy and KL divergence.

#include "musrover/dist.h"

#include <algorithm>
#include <map>

#include <fmt/format.h>

#include "musrover/error.h"

namespace musrover {

const std::vector<double>* CondDist::row(const FeatureValue& c) const {
  auto it = std::lower_bound(contexts.begin(), contexts.end(), c);
  if (it == contexts.end() || *it != c) return nullptr;
  return &rows[static_cast<std::size_t>(it - contexts.begin())];
}

Dist empiricalUnigram(const UnigramCounts& counts, const Omega& omega,
                      const Partition& partition) {
  std::int64_t total = 0;
  for (const auto& [x, n] : counts) total += n;
  if (counts.empty() || total <= 0) throw DataError("empirical_unigram: empty counts");

  Dist d{partition.values(), std::vector<double>(partition.cellCount(), 0.0)};
  std::vector<std::int64_t> tally(partition.cellCount(), 0);
  for (const auto& [x, n] : counts) {
    FeatureValue v = applyFeature(partition.feature(), omega.decode(x));
    tally[static_cast<std::size_t>(partition.indexOf(v))] += n;
  }
  for (std::size_t i = 0; i < tally.size(); ++i) {
    d.mass[i] = static_cast<double>(tally[i]) / static_cast<double>(total);
  }
  return d;
}

CondDist empiricalBigram(const BigramCounts& pairs, const Omega& omega,
                         const Partition& partition) {
  if (pairs.empty()) throw DataError("empirical_bigram: no adjacent pairs");
  const Feature& f = partition.feature();
  std::map<std::int64_t, std::vector<std::int64_t>> tally;
  std::int64_t total = 0;
  for (const auto& [xy, n] : pairs) {
    std::int64_t a = partition.indexOf(applyFeature(f, omega.decode(xy.first)));
    std::int64_t b = partition.indexOf(applyFeature(f, omega.decode(xy.second)));
    auto& row = tally[a];
    if (row.empty()) row.assign(partition.cellCount(), 0);
    row[static_cast<std::size_t>(b)] += n;
    total += n;
  }
  CondDist d;
  d.alphabet = partition.values();
  for (const auto& [a, row] : tally) {
    std::int64_t out = 0;
    for (std::int64_t n : row) out += n;
    d.contexts.push_back(partition.values()[static_cast<std::size_t>(a)]);
    d.weights.push_back(static_cast<double>(out) / static_cast<double>(total));
    std::vector<double> masses(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) {
      masses[i] = static_cast<double>(row[i]) / static_cast<double>(out);
    }
    d.rows.push_back(std::move(masses));
  }
  return d;
}

double entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return std::max(h, 0.0);
}

double conditionalEntropy(const CondDist& d) {
  double h = 0.0;
  for (std::size_t c = 0; c < d.rows.size(); ++c) h += d.weights[c] * entropy(d.rows[c]);
  return h;
}

double klDivergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) {
    throw DataError(fmt::format("kl_divergence: alphabet sizes differ ({} vs {})", p.size(),
                                q.size()));
  }
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (q[i] <= 0.0) return kInfinity;
    d += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(d, 0.0);
}

double klDivergence(const Dist& p, const Dist& q) {
  if (p.alphabet != q.alphabet) throw DataError("kl_divergence: alphabets differ");
  return klDivergence(p.mass, q.mass);
}

double conditionalKl(const CondDist& phat, const CondDist& pstud) {
  if (phat.alphabet != pstud.alphabet) throw DataError("conditional_kl: alphabets differ");
  double d = 0.0;
  for (std::size_t c = 0; c < phat.contexts.size(); ++c) {
    const auto* row = pstud.row(phat.contexts[c]);
    if (row == nullptr) {
      throw DataError("conditional_kl: context '" + valueLabel(phat.contexts[c]) +
                      "' missing from the student");
    }
    if (phat.weights[c] <= 0.0) continue;
    d += phat.weights[c] * klDivergence(phat.rows[c], *row);
  }
  return d;
}

}  // namespace musrover
