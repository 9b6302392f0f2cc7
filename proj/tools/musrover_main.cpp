// musrover: command-line front end for corpus ingestion, rule learning and reports.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "musrover/artifacts.h"
#include "musrover/corpus.h"
#include "musrover/error.h"
#include "musrover/features.h"
#include "musrover/loop.h"
#include "musrover/ngram.h"
#include "musrover/rulebook.h"
#include "musrover/student.h"

namespace {

using namespace musrover;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitSolver = 3;

struct Args {
  std::string corpus;
  std::string out;
  std::string from_trace;
  std::string feature;
  std::string model;
  std::string trace;
  std::string objective = "tsallis2";
  double alpha = 0.5;
  double epsilon = 0.005;
  int max_iters = 20;
  double tol = 1e-8;
  int max_sweeps = 10000;
  bool merge_repeats = false;
  bool validate_only = false;
  std::size_t max_omega = 2'000'000;
  std::size_t length = 0;
  std::uint64_t seed = 0;
};

int runIngest(const Args& a) {
  CorpusModel corpus = loadCorpus(a.corpus, {a.max_omega});
  if (a.validate_only) {
    std::cout << "ok\n";
    return kExitOk;
  }
  std::cout << fmt::format("pieces: {}\ncolumns: {}\nomega: {}\nfingerprint: {}\n",
                           corpus.pieces.size(), corpus.column_count, corpus.omega.size(),
                           corpus.fingerprint);
  static constexpr const char* kNames[] = {"soprano", "alto", "tenor", "bass"};
  for (int v = 0; v < kVoiceCount; ++v) {
    const VoiceRange& r = corpus.omega.range(v);
    std::cout << fmt::format("{}: [{}, {}]\n", kNames[v], r.lo, r.hi);
  }
  return kExitOk;
}

int runRulebook(const Args& a) {
  CorpusModel corpus = loadCorpus(a.corpus, {a.max_omega});
  FeatureSpace space(corpus.omega);
  Empirical empirical = computeEmpirical(corpus, space, a.merge_repeats);
  writeArtifacts(buildRuleBook(corpus.fingerprint, empirical), {}, nullptr, a.out);
  std::cout << "wrote " << (std::filesystem::path(a.out) / "rulebook.json").string() << "\n";
  return kExitOk;
}

LoopConfig configFrom(const Args& a) {
  LoopConfig cfg;
  cfg.alpha = a.alpha;
  cfg.epsilon = a.epsilon;
  cfg.max_iters = a.max_iters;
  cfg.solver.objective = parseObjective(a.objective);
  cfg.solver.tol = a.tol;
  cfg.solver.max_sweeps = a.max_sweeps;
  cfg.merge_repeats = a.merge_repeats;
  return cfg;
}

int runTrace(const Args& a) {
  const LoopConfig cfg = configFrom(a);
  validateConfig(cfg);
  CorpusModel corpus = loadCorpus(a.corpus, {a.max_omega});
  FeatureSpace space(corpus.omega);
  Empirical empirical = computeEmpirical(corpus, space, cfg.merge_repeats);
  UnigramResult result = runUnigramLoop(space, empirical, corpus.fingerprint, cfg);
  const std::vector<TraceArtifact> artifacts = {
      {alphaTag(cfg.alpha), &result.trace, &result.student}};
  writeArtifacts(buildRuleBook(corpus.fingerprint, empirical), artifacts, nullptr, a.out);
  std::cout << traceReport(result.trace, cfg.epsilon);
  return kExitOk;
}

int runBigram(const Args& a) {
  Trace unigram_trace = traceFromJson(readFile(a.from_trace));
  if (unigram_trace.phase != Phase::kUnigram) {
    throw DataError("--from-trace must point at a unigram trace");
  }
  CorpusModel corpus = loadCorpus(a.corpus, {a.max_omega});
  if (corpus.fingerprint != unigram_trace.corpus_fingerprint) {
    throw DataError("trace was produced on a different corpus (fingerprint mismatch)");
  }
  const LoopConfig& uni_cfg = unigram_trace.config;
  FeatureSpace space(corpus.omega);
  Empirical empirical = computeEmpirical(corpus, space, uni_cfg.merge_repeats);
  std::vector<Feature> order;
  for (const TraceRule& r : unigram_trace.rules) order.push_back(r.feature);
  UnigramResult unigram =
      replayUnigramTrace(space, empirical, corpus.fingerprint, uni_cfg, order);

  LoopConfig cfg = uni_cfg;
  cfg.alpha = a.alpha;
  cfg.epsilon = a.epsilon;
  cfg.max_iters = a.max_iters;
  BigramEmpirical bigram = computeBigramEmpirical(space, empirical.stream.bigram);
  BigramResult result = runBigramLoop(space, empirical, bigram, unigram, cfg);

  RuleBook book = buildRuleBook(corpus.fingerprint, empirical);
  addBigramRules(book, result.rules);
  const DiffReport diff = diffRulebooks(book, book);
  const std::vector<TraceArtifact> artifacts = {
      {alphaTag(uni_cfg.alpha), &unigram.trace, &unigram.student},
      {"bigram_" + alphaTag(cfg.alpha), &result.trace, &result.student}};
  writeArtifacts(book, artifacts, &diff, a.out);
  std::cout << traceReport(result.trace, cfg.epsilon) << renderDiffReport(diff);
  return kExitOk;
}

int runDescribe(const Args& a) {
  Feature f = parseFeature(a.feature);
  std::cout << f.str() << ": " << describeFeature(f) << "\n";
  return kExitOk;
}

int runSample(const Args& a) {
  StudentModel model = studentFromJson(readFile(a.model));
  auto columns = sampleSequence(model, a.length, a.seed);
  writeFile(a.out, sequenceToCorpusJson(columns, fmt::format("sample-{}", a.seed)));
  return kExitOk;
}

int runReport(const Args& a) {
  Trace trace = traceFromJson(readFile(a.trace));
  std::cout << traceReport(trace, a.epsilon);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"musrover: learn interpretable compositional rules from four-voice corpora"};
  app.require_subcommand(1);
  Args a;

  auto* ingest = app.add_subcommand("ingest", "Parse and validate a corpus");
  ingest->add_option("--corpus", a.corpus, "Corpus JSON path")->required();
  ingest->add_flag("--validate-only", a.validate_only, "Only report whether the corpus is valid");
  ingest->add_option("--max-omega", a.max_omega, "Largest admissible raw alphabet");

  auto* rulebook = app.add_subcommand("rulebook", "Write the 63-rule unigram rule book");
  rulebook->add_option("--corpus", a.corpus)->required();
  rulebook->add_option("--out", a.out)->required();
  rulebook->add_flag("--merge-repeats", a.merge_repeats);
  rulebook->add_option("--max-omega", a.max_omega);

  auto* trace = app.add_subcommand("trace", "Run the unigram self-learning loop");
  trace->add_option("--corpus", a.corpus)->required();
  trace->add_option("--alpha", a.alpha, "Efficiency/memorability trade-off in [0,1]");
  trace->add_option("--epsilon", a.epsilon, "Gap threshold");
  trace->add_option("--max-iters", a.max_iters, "Iteration cap (<= 62)");
  trace->add_option("--objective", a.objective)->check(CLI::IsMember({"tsallis2", "shannon"}));
  trace->add_flag("--merge-repeats", a.merge_repeats, "Collapse repeated columns");
  trace->add_option("--tol", a.tol, "Solver tolerance");
  trace->add_option("--max-sweeps", a.max_sweeps, "Solver sweep budget");
  trace->add_option("--max-omega", a.max_omega);
  trace->add_option("--out", a.out)->required();

  auto* bigram = app.add_subcommand("bigram", "Continue a unigram trace with bigram rules");
  bigram->add_option("--corpus", a.corpus)->required();
  bigram->add_option("--from-trace", a.from_trace, "Unigram trace JSON")->required();
  bigram->add_option("--alpha", a.alpha);
  bigram->add_option("--epsilon", a.epsilon);
  bigram->add_option("--max-iters", a.max_iters);
  bigram->add_option("--max-omega", a.max_omega);
  bigram->add_option("--out", a.out)->required();

  auto* describe = app.add_subcommand("describe", "Explain a feature address");
  describe->add_option("--feature", a.feature, "e.g. interv12@1,4")->required();

  auto* sample = app.add_subcommand("sample", "Draw a sonority sequence from a student");
  sample->add_option("--model", a.model)->required();
  sample->add_option("--length", a.length)->required();
  sample->add_option("--seed", a.seed)->required();
  sample->add_option("--out", a.out)->required();

  auto* report = app.add_subcommand("report", "Efficiency, memorability and entanglement");
  report->add_option("--trace", a.trace)->required();
  report->add_option("--epsilon", a.epsilon);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) return runIngest(a);
    if (rulebook->parsed()) return runRulebook(a);
    if (trace->parsed()) return runTrace(a);
    if (bigram->parsed()) return runBigram(a);
    if (describe->parsed()) return runDescribe(a);
    if (sample->parsed()) return runSample(a);
    if (report->parsed()) return runReport(a);
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const InfeasibleConstraintError& e) {
    std::cerr << "infeasible constraint: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
