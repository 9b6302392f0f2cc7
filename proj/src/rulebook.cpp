// Rule book assembly, JSON round trip and human-readable rule rendering.

#include "musrover/rulebook.h"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "json_util.h"
#include "musrover/error.h"
#include "musrover/loop.h"

namespace musrover {

namespace {

using json_util::Json;

constexpr std::string_view kFormat = "musrover-rulebook";
constexpr double kCertain = 1.0 - 1e-12;

std::string_view voiceName(int voice) {
  static constexpr std::array<std::string_view, 4> kNames = {"soprano", "alto", "tenor", "bass"};
  return kNames[voice - 1];
}

std::string_view relation(int sign) {
  return sign > 0 ? "above" : (sign < 0 ? "below" : "level with");
}

// "soprano above alto above bass" for an order value.
std::string orderStatement(const Feature& f, const FeatureValue& v) {
  const auto& voices = f.window.voices();
  std::string out{voiceName(voices[0])};
  for (std::size_t j = 0; j < v.size; ++j) {
    out += fmt::format(" {} {}", relation(v.data[j]), voiceName(voices[j + 1]));
  }
  return out;
}

std::string renderMasses(const Feature& feature, std::span<const FeatureValue> alphabet,
                         std::span<const double> mass, RenderStyle style, std::size_t top_k) {
  const auto best = std::max_element(mass.begin(), mass.end());
  if (best != mass.end() && *best >= kCertain) {
    const FeatureValue& v = alphabet[static_cast<std::size_t>(best - mass.begin())];
    if (feature.descriptor == Descriptor::kOrder) {
      return orderStatement(feature, v) + ": always (1.00)";
    }
    return fmt::format("{}: always {} (1.00)", describeFeature(feature), valueLabel(v));
  }

  std::vector<std::size_t> order(mass.size());
  std::iota(order.begin(), order.end(), 0);
  std::string out = describeFeature(feature) + ":";
  bool truncated = false;
  if (style == RenderStyle::kTopK) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mass[a] > mass[b]; });
    std::erase_if(order, [&](std::size_t i) { return mass[i] <= 0.0; });
    if (order.size() > top_k) {
      order.resize(top_k);
      truncated = true;
    }
  }
  for (std::size_t n = 0; n < order.size(); ++n) {
    out += fmt::format("{} {} {}", n == 0 ? "" : ",", valueLabel(alphabet[order[n]]),
                       formatProbability(mass[order[n]]));
  }
  if (truncated) out += ", …";
  return out;
}

}  // namespace

std::string formatProbability(double p) {
  return p >= 0.1 || p <= 0.0 ? fmt::format("{:.2f}", p) : fmt::format("{:.3f}", p);
}

RuleBook buildRuleBook(const std::string& fingerprint, const Empirical& empirical) {
  RuleBook book;
  book.corpus_fingerprint = fingerprint;
  const auto& features = enumerateFeatures();
  for (std::size_t i = 0; i < features.size(); ++i) {
    book.unigram.push_back({features[i], empirical.unigram[i], empirical.entropy[i]});
  }
  return book;
}

void addBigramRules(RuleBook& book, const std::vector<BigramRule>& rules) {
  for (const BigramRule& r : rules) {
    book.bigram.push_back({r.feature, r.target, r.learned_at, conditionalEntropy(r.target)});
  }
}

std::string ruleBookToJson(const RuleBook& book) {
  Json doc;
  doc["format"] = kFormat;
  doc["version"] = 1;
  doc["corpus_fingerprint"] = book.corpus_fingerprint;
  doc["unigram"] = Json::array();
  for (const UnigramEntry& e : book.unigram) {
    Json j;
    j["feature"] = e.feature.str();
    j["description"] = describeFeature(e.feature);
    j["entropy_nats"] = json_util::real(e.entropy);
    j["entropy_bits"] = json_util::real(toBits(e.entropy));
    j["distribution"] = json_util::dist(e.dist);
    doc["unigram"].push_back(std::move(j));
  }
  doc["bigram"] = Json::array();
  for (const BigramEntry& e : book.bigram) {
    Json j;
    j["feature"] = e.feature.str();
    j["description"] = describeFeature(e.feature);
    j["learned_at"] = e.learned_at;
    j["entropy_nats"] = json_util::real(e.entropy);
    j["entropy_bits"] = json_util::real(toBits(e.entropy));
    j["distribution"] = json_util::condDist(e.dist);
    doc["bigram"].push_back(std::move(j));
  }
  doc["traces"] = book.traces;
  return doc.dump(2) + "\n";
}

RuleBook ruleBookFromJson(std::string_view text) {
  Json doc = json_util::parse(text, "rulebook");
  try {
    if (doc.at("format") != kFormat) throw DataError("not a rulebook document");
    RuleBook book;
    book.corpus_fingerprint = doc.at("corpus_fingerprint").get<std::string>();
    for (const Json& j : doc.at("unigram")) {
      Feature f = parseFeature(j.at("feature").get<std::string>());
      book.unigram.push_back({f, json_util::readDist(j.at("distribution"), f.descriptor),
                              json_util::readReal(j.at("entropy_nats"))});
    }
    for (const Json& j : doc.at("bigram")) {
      Feature f = parseFeature(j.at("feature").get<std::string>());
      book.bigram.push_back({f, json_util::readCondDist(j.at("distribution"), f.descriptor),
                             j.at("learned_at").get<int>(),
                             json_util::readReal(j.at("entropy_nats"))});
    }
    book.traces = doc.at("traces").get<std::vector<std::string>>();
    if (book.unigram.size() != enumerateFeatures().size()) {
      throw DataError(fmt::format("rulebook has {} unigram entries, expected 63",
                                  book.unigram.size()));
    }
    return book;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed rulebook JSON: ") + e.what());
  }
}

std::string renderRule(const Feature& feature, const Dist& dist, RenderStyle style,
                       std::size_t top_k) {
  return renderMasses(feature, dist.alphabet, dist.mass, style, top_k);
}

std::string renderBigramRule(const Feature& feature, const CondDist& dist, RenderStyle style,
                             std::size_t top_k) {
  std::string out;
  for (std::size_t r = 0; r < dist.contexts.size(); ++r) {
    out += fmt::format("after {} (weight {}): {}\n", valueLabel(dist.contexts[r]),
                       formatProbability(dist.weights[r]),
                       renderMasses(feature, dist.alphabet, dist.rows[r], style, top_k));
  }
  return out;
}

}  // namespace musrover
