// Tests for rule rendering, JSON round trips and artifact emission.

#include <algorithm>
#include <filesystem>
#include <map>
#include <random>

#include <gtest/gtest.h>
#include <json.hpp>

#include "musrover/artifacts.h"
#include "musrover/error.h"
#include "musrover/loop.h"
#include "musrover/ngram.h"
#include "musrover/rulebook.h"
#include "test_util.h"

namespace musrover {
namespace {

using testing::corpusFromSequences;

std::filesystem::path scratchDir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("musrover_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

Dist intervalDist(const std::vector<std::pair<int, double>>& masses) {
  Dist d;
  for (const auto& [ic, m] : masses) {
    d.alphabet.push_back({Descriptor::kInterv12, 1, {ic}});
    d.mass.push_back(m);
  }
  return d;
}

TEST(RulebookTest, RenderTopK) {
  Dist d = intervalDist({{0, 0.05}, {3, 0.21}, {4, 0.19}, {5, 0.04}, {7, 0.18}, {8, 0.17},
                         {9, 0.16}});
  std::string text = renderRule(parseFeature("interv12@1,4"), d, RenderStyle::kTopK, 3);
  EXPECT_EQ(text,
            "interval class (semitone distance mod 12) between soprano and bass: "
            "m3 0.21, M3 0.19, P5 0.18, …");
  std::string full = renderRule(parseFeature("interv12@1,4"), d, RenderStyle::kFull);
  EXPECT_NE(full.find("P1/P8 0.050"), std::string::npos);
  EXPECT_EQ(full.find("…"), std::string::npos);
}

TEST(RulebookTest, RenderDeterministicOrder) {
  Dist d;
  d.alphabet = {{Descriptor::kOrder, 1, {-1}}, {Descriptor::kOrder, 1, {0}},
                {Descriptor::kOrder, 1, {1}}};
  d.mass = {0.0, 0.0, 1.0};
  EXPECT_EQ(renderRule(parseFeature("order@1,4"), d), "soprano above bass: always (1.00)");
}

TEST(RulebookTest, RenderTopOneOfUniform) {
  Dist d;
  for (int pc = 0; pc < 12; ++pc) {
    d.alphabet.push_back({Descriptor::kPitch12, 1, {pc}});
    d.mass.push_back(1.0 / 12.0);
  }
  EXPECT_EQ(renderRule(parseFeature("pitch12@1"), d, RenderStyle::kTopK, 1),
            "pitch class of the soprano: C 0.083, …");
}

TEST(RulebookTest, FormatProbability) {
  EXPECT_EQ(formatProbability(0.0), "0.00");
  EXPECT_EQ(formatProbability(1.0), "1.00");
  EXPECT_EQ(formatProbability(0.25), "0.25");
  EXPECT_EQ(formatProbability(0.0833), "0.083");
}

struct Fixture {
  CorpusModel corpus;
  FeatureSpace space;
  Empirical empirical;
};

Fixture fixture() {
  std::mt19937_64 rng(31);
  CorpusModel corpus = corpusFromSequences(testing::randomSequences(rng, 3, 25, 3));
  FeatureSpace space(corpus.omega);
  Empirical e = computeEmpirical(corpus, space, false);
  return {std::move(corpus), std::move(space), std::move(e)};
}

TEST(RulebookTest, RuleBookJsonRoundTrip) {
  Fixture f = fixture();
  RuleBook book = buildRuleBook(f.corpus.fingerprint, f.empirical);
  ASSERT_EQ(book.unigram.size(), 63u);
  auto doc = nlohmann::json::parse(ruleBookToJson(book));
  EXPECT_TRUE(doc["bigram"].is_array());
  EXPECT_TRUE(doc["bigram"].empty());
  EXPECT_EQ(ruleBookFromJson(ruleBookToJson(book)), book);

  BigramEmpirical b = computeBigramEmpirical(f.space, f.empirical.stream.bigram);
  const Feature g = parseFeature("pitch12@1,4");
  addBigramRules(book, {{g, b.cond[featureIndex(g)], 1}});
  ASSERT_EQ(book.bigram.size(), 1u);
  EXPECT_EQ(ruleBookFromJson(ruleBookToJson(book)), book);

  EXPECT_THROW(ruleBookFromJson("{}"), DataError);
  EXPECT_THROW(ruleBookFromJson("[1,"), DataError);
}

TEST(RulebookTest, TraceJsonRoundTripAndSentinel) {
  Fixture f = fixture();
  LoopConfig cfg;
  cfg.max_iters = 3;
  cfg.epsilon = 1e-12;
  UnigramResult r = runUnigramLoop(f.space, f.empirical, f.corpus.fingerprint, cfg);
  std::string text = traceToJson(r.trace);
  auto doc = nlohmann::json::parse(text);
  EXPECT_TRUE(doc["efficiency"].is_null());
  EXPECT_EQ(doc["reached_epsilon"], false);
  Trace back = traceFromJson(text);
  EXPECT_EQ(back.gap_history, r.trace.gap_history);
  EXPECT_EQ(back.footprints, r.trace.footprints);
  EXPECT_EQ(back.rules.size(), r.trace.rules.size());
  EXPECT_EQ(back.rules[1].target, r.trace.rules[1].target);
  EXPECT_EQ(back.config.max_iters, 3);
  EXPECT_EQ(traceToJson(back), text);

  std::string csv = footprintsCsv(r.trace);
  EXPECT_EQ(csv.substr(0, 29), "iteration,pitch@1,\"pitch@1,2\"");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
}

TEST(RulebookTest, StudentJsonRoundTrip) {
  Fixture f = fixture();
  LoopConfig cfg;
  cfg.max_iters = 2;
  UnigramResult u = runUnigramLoop(f.space, f.empirical, f.corpus.fingerprint, cfg);
  StudentModel back = studentFromJson(studentToJson(u.student));
  EXPECT_EQ(back.p, u.student.p);
  EXPECT_EQ(back.omega, u.student.omega);

  BigramResult b = runBigramLoop(f.corpus, u, cfg);
  StudentModel bb = studentFromJson(studentToJson(b.student));
  EXPECT_EQ(bb.group_p, b.student.group_p);
  EXPECT_EQ(bb.context_group, b.student.context_group);
  EXPECT_EQ(sampleSequence(bb, 30, 9), sampleSequence(b.student, 30, 9));
}

std::map<std::string, std::string> readAll(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    files[entry.path().filename().string()] = readFile(entry.path());
  }
  return files;
}

std::map<std::string, std::string> endToEnd(const std::filesystem::path& dir) {
  Fixture f = fixture();
  LoopConfig cfg;
  cfg.max_iters = 3;
  UnigramResult u = runUnigramLoop(f.space, f.empirical, f.corpus.fingerprint, cfg);
  BigramEmpirical be = computeBigramEmpirical(f.space, f.empirical.stream.bigram);
  BigramResult b = runBigramLoop(f.space, f.empirical, be, u, cfg);
  RuleBook book = buildRuleBook(f.corpus.fingerprint, f.empirical);
  addBigramRules(book, b.rules);
  DiffReport diff = diffRulebooks(book, book);
  std::vector<TraceArtifact> traces = {{alphaTag(cfg.alpha), &u.trace, &u.student},
                                       {"bigram_" + alphaTag(cfg.alpha), &b.trace, &b.student}};
  writeArtifacts(book, traces, &diff, dir);
  return readAll(dir);
}

TEST(RulebookTest, ArtifactsAreCompleteAndByteStable) {
  auto first = endToEnd(scratchDir("a"));
  auto second = endToEnd(scratchDir("b"));
  EXPECT_EQ(first, second);
  for (const char* name : {"rulebook.json", "report.txt", "trace_0.5.json", "footprints_0.5.csv",
                           "student_0.5.json", "trace_bigram_0.5.json",
                           "footprints_bigram_0.5.csv", "student_bigram_0.5.json"}) {
    EXPECT_TRUE(first.count(name)) << name;
  }
  const std::string& report = first["report.txt"];
  EXPECT_NE(report.find("M_eps"), std::string::npos);
  EXPECT_NE(report.find("bits"), std::string::npos);
  EXPECT_NE(report.find("Entanglement"), std::string::npos);
  EXPECT_NE(report.find("Bigram vs unigram differences"), std::string::npos);
  auto book = ruleBookFromJson(first["rulebook.json"]);
  EXPECT_EQ(book.traces.size(), 2u);
}

TEST(RulebookTest, AlphaTags) {
  EXPECT_EQ(alphaTag(0.5), "0.5");
  EXPECT_EQ(alphaTag(1.0), "1");
  EXPECT_EQ(alphaTag(0.05), "0.05");
}

}  // namespace
}  // namespace musrover
