// Trace, student and report serialization plus the artifact writer.

#include "musrover/artifacts.h"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "json_util.h"
#include "musrover/error.h"

namespace musrover {

namespace {

using json_util::Json;

constexpr std::string_view kTraceFormat = "musrover-trace";
constexpr std::string_view kStudentFormat = "musrover-student";

std::string csvField(const std::string& s) {
  return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
}

std::string gapText(double g) {
  return std::isinf(g) ? "inf" : fmt::format("{:.6g}", g);
}

Json configJson(const LoopConfig& cfg) {
  Json j;
  j["alpha"] = cfg.alpha;
  j["epsilon"] = cfg.epsilon;
  j["max_iters"] = cfg.max_iters;
  j["objective"] = std::string(objectiveName(cfg.solver.objective));
  j["tol"] = cfg.solver.tol;
  j["max_sweeps"] = cfg.solver.max_sweeps;
  j["merge_repeats"] = cfg.merge_repeats;
  j["normalize_by_log_range"] = cfg.normalize_by_log_range;
  return j;
}

LoopConfig readConfig(const Json& j) {
  LoopConfig cfg;
  cfg.alpha = j.at("alpha").get<double>();
  cfg.epsilon = j.at("epsilon").get<double>();
  cfg.max_iters = j.at("max_iters").get<int>();
  cfg.solver.objective = parseObjective(j.at("objective").get<std::string>());
  cfg.solver.tol = j.at("tol").get<double>();
  cfg.solver.max_sweeps = j.at("max_sweeps").get<int>();
  cfg.merge_repeats = j.at("merge_repeats").get<bool>();
  cfg.normalize_by_log_range = j.value("normalize_by_log_range", false);
  return cfg;
}

Json candidateJson(const ScoredCandidate& c) {
  Json j;
  j["feature"] = c.feature.str();
  j["kl"] = json_util::real(c.kl);
  j["entropy"] = json_util::real(c.entropy);
  j["score"] = json_util::real(c.score);
  return j;
}

}  // namespace

std::string alphaTag(double alpha) { return fmt::format("{}", alpha); }

std::string traceToJson(const Trace& trace) {
  const double eps = trace.config.epsilon;
  const auto e = efficiency(trace, eps);
  const double m = memorability(trace, eps);
  Json doc;
  doc["format"] = kTraceFormat;
  doc["version"] = 1;
  doc["phase"] = trace.phase == Phase::kUnigram ? "unigram" : "bigram";
  doc["corpus_fingerprint"] = trace.corpus_fingerprint;
  doc["config"] = configJson(trace.config);
  doc["stop_reason"] = trace.stop_reason;
  doc["efficiency"] = e ? Json(*e) : Json(nullptr);
  doc["reached_epsilon"] = e.has_value();
  doc["memorability_nats"] = json_util::real(m);
  doc["memorability_bits"] = json_util::real(toBits(m));
  doc["rules"] = Json::array();
  for (const TraceRule& r : trace.rules) {
    Json j;
    j["index"] = r.learned_at;
    j["feature"] = r.feature.str();
    j["description"] = describeFeature(r.feature);
    j["kl_nats"] = json_util::real(r.kl);
    j["entropy_nats"] = json_util::real(r.entropy);
    j["entropy_bits"] = json_util::real(toBits(r.entropy));
    j["score"] = json_util::real(r.score);
    j["target"] = r.cond_target ? json_util::condDist(*r.cond_target) : json_util::dist(r.target);
    doc["rules"].push_back(std::move(j));
  }
  doc["gap_history"] = json_util::reals(trace.gap_history);
  Json features = Json::array();
  for (const Feature& f : enumerateFeatures()) features.push_back(f.str());
  doc["footprint_features"] = std::move(features);
  Json footprints = Json::array();
  for (const auto& row : trace.footprints) footprints.push_back(json_util::reals(row));
  doc["footprints"] = std::move(footprints);
  Json scores = Json::array();
  for (const auto& iteration : trace.candidate_scores) {
    Json row = Json::array();
    for (const ScoredCandidate& c : iteration) row.push_back(candidateJson(c));
    scores.push_back(std::move(row));
  }
  doc["candidate_scores"] = std::move(scores);
  return doc.dump(2) + "\n";
}

Trace traceFromJson(std::string_view text) {
  Json doc = json_util::parse(text, "trace");
  try {
    if (doc.at("format") != kTraceFormat) throw DataError("not a trace document");
    Trace trace;
    const std::string phase = doc.at("phase").get<std::string>();
    if (phase != "unigram" && phase != "bigram") throw DataError("unknown trace phase " + phase);
    trace.phase = phase == "unigram" ? Phase::kUnigram : Phase::kBigram;
    trace.corpus_fingerprint = doc.at("corpus_fingerprint").get<std::string>();
    trace.config = readConfig(doc.at("config"));
    trace.stop_reason = doc.at("stop_reason").get<std::string>();
    for (const Json& j : doc.at("rules")) {
      TraceRule r;
      r.feature = parseFeature(j.at("feature").get<std::string>());
      r.learned_at = j.at("index").get<int>();
      r.kl = json_util::readReal(j.at("kl_nats"));
      r.entropy = json_util::readReal(j.at("entropy_nats"));
      r.score = json_util::readReal(j.at("score"));
      if (trace.phase == Phase::kUnigram) {
        r.target = json_util::readDist(j.at("target"), r.feature.descriptor);
      } else {
        r.cond_target = json_util::readCondDist(j.at("target"), r.feature.descriptor);
      }
      trace.rules.push_back(std::move(r));
    }
    trace.gap_history = json_util::readReals(doc.at("gap_history"));
    const auto& features = enumerateFeatures();
    const Json& names = doc.at("footprint_features");
    if (names.size() != features.size()) throw DataError("trace footprints must cover 63 features");
    for (std::size_t i = 0; i < features.size(); ++i) {
      if (names[i].get<std::string>() != features[i].str()) {
        throw DataError("trace footprint features are not in canonical order");
      }
    }
    for (const Json& row : doc.at("footprints")) {
      trace.footprints.push_back(json_util::readReals(row));
      if (trace.footprints.back().size() != features.size()) {
        throw DataError("footprint row has the wrong width");
      }
    }
    for (const Json& row : doc.at("candidate_scores")) {
      std::vector<ScoredCandidate> iteration;
      for (const Json& c : row) {
        iteration.push_back({parseFeature(c.at("feature").get<std::string>()),
                             json_util::readReal(c.at("kl")),
                             json_util::readReal(c.at("entropy")),
                             json_util::readReal(c.at("score"))});
      }
      trace.candidate_scores.push_back(std::move(iteration));
    }
    if (trace.gap_history.size() != trace.footprints.size()) {
      throw DataError("gap history and footprints disagree in length");
    }
    return trace;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed trace JSON: ") + e.what());
  }
}

std::string footprintsCsv(const Trace& trace) {
  std::string out = "iteration";
  for (const Feature& f : enumerateFeatures()) out += "," + csvField(f.str());
  out += "\n";
  for (std::size_t j = 0; j < trace.footprints.size(); ++j) {
    out += std::to_string(j);
    for (double g : trace.footprints[j]) {
      out += std::isinf(g) ? std::string(",inf") : fmt::format(",{}", g);
    }
    out += "\n";
  }
  return out;
}

std::string studentToJson(const StudentModel& model) {
  Json doc;
  doc["format"] = kStudentFormat;
  doc["version"] = 1;
  doc["kind"] = model.kind == StudentModel::Kind::kUnigram ? "unigram" : "bigram";
  doc["objective"] = std::string(objectiveName(model.options.objective));
  doc["tol"] = model.options.tol;
  doc["max_sweeps"] = model.options.max_sweeps;
  doc["residual"] = json_util::real(model.residual);
  doc["sweeps"] = model.sweeps;
  doc["converged"] = model.converged;
  doc["dropped_constraints"] = model.dropped_constraints;
  Json ranges = Json::array();
  for (const VoiceRange& r : model.omega.ranges()) ranges.push_back({r.lo, r.hi});
  doc["omega"] = {{"ranges", ranges}, {"size", model.omega.size()}};
  doc["p"] = json_util::reals(model.p);
  Json groups = Json::array();
  for (const auto& g : model.group_p) groups.push_back(json_util::reals(g));
  doc["groups"] = std::move(groups);
  Json contexts = Json::array();
  for (const auto& [c, g] : model.context_group) {
    const Sonority s = model.omega.decode(c);
    contexts.push_back({{"sonority", s}, {"group", g}});
  }
  doc["contexts"] = std::move(contexts);
  return doc.dump(2) + "\n";
}

StudentModel studentFromJson(std::string_view text) {
  Json doc = json_util::parse(text, "student");
  try {
    if (doc.at("format") != kStudentFormat) throw DataError("not a student document");
    StudentModel model;
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind != "unigram" && kind != "bigram") throw DataError("unknown student kind " + kind);
    model.kind = kind == "unigram" ? StudentModel::Kind::kUnigram : StudentModel::Kind::kBigram;
    model.options.objective = parseObjective(doc.at("objective").get<std::string>());
    model.options.tol = doc.at("tol").get<double>();
    model.options.max_sweeps = doc.at("max_sweeps").get<int>();
    model.residual = json_util::readReal(doc.at("residual"));
    model.sweeps = doc.at("sweeps").get<int>();
    model.converged = doc.at("converged").get<bool>();
    model.dropped_constraints = doc.at("dropped_constraints").get<std::size_t>();
    std::array<VoiceRange, kVoiceCount> ranges{};
    const Json& jr = doc.at("omega").at("ranges");
    if (jr.size() != kVoiceCount) throw DataError("student omega must have 4 ranges");
    for (int v = 0; v < kVoiceCount; ++v) {
      ranges[v] = {jr[v].at(0).get<int>(), jr[v].at(1).get<int>()};
      if (ranges[v].size() < 1) throw DataError("empty voice range in student omega");
    }
    model.omega = Omega(ranges);
    model.p = json_util::readReals(doc.at("p"));
    if (model.p.size() != model.omega.size()) throw DataError("student mass has the wrong size");
    for (const Json& g : doc.at("groups")) {
      model.group_p.push_back(json_util::readReals(g));
      if (model.group_p.back().size() != model.omega.size()) {
        throw DataError("student group has the wrong size");
      }
    }
    for (const Json& c : doc.at("contexts")) {
      Sonority s = c.at("sonority").get<Sonority>();
      auto g = c.at("group").get<std::size_t>();
      if (!model.omega.contains(s) || g >= model.group_p.size()) {
        throw DataError("student context out of range");
      }
      model.context_group.emplace_back(model.omega.encode(s), g);
    }
    std::sort(model.context_group.begin(), model.context_group.end());
    return model;
  } catch (const Json::exception& e) {
    throw DataError(std::string("malformed student JSON: ") + e.what());
  }
}

std::string sequenceToCorpusJson(const std::vector<Sonority>& columns, const std::string& id) {
  Piece piece;
  piece.id = id;
  for (const Sonority& s : columns) {
    for (int v = 0; v < kVoiceCount; ++v) piece.voices[v].push_back({s[v], 1});
  }
  return serializePieces({piece}) + "\n";
}

std::string traceReport(const Trace& trace, double epsilon) {
  const auto& cfg = trace.config;
  std::string out = fmt::format(
      "Trace ({}, alpha={}, epsilon={}, objective={}, max_iters={})\n",
      trace.phase == Phase::kUnigram ? "unigram" : "bigram", cfg.alpha, epsilon,
      objectiveName(cfg.solver.objective), cfg.max_iters);
  out += fmt::format("stopped: {} after {} rules; initial gap {}\n", trace.stop_reason,
                     trace.rules.size(),
                     trace.gap_history.empty() ? "n/a" : gapText(trace.gap_history.front()));
  out += fmt::format("  {:>3}  {:<16} {:>14} {:>14} {:>12}\n", "k", "feature", "entropy(nats)",
                     "entropy(bits)", "gap after");
  for (const TraceRule& r : trace.rules) {
    const double gap = static_cast<std::size_t>(r.learned_at) < trace.gap_history.size()
                           ? trace.gap_history[r.learned_at]
                           : kInfinity;
    out += fmt::format("  {:>3}  {:<16} {:>14.4f} {:>14.4f} {:>12}\n", r.learned_at,
                       r.feature.str(), r.entropy, toBits(r.entropy), gapText(gap));
  }
  const auto e = efficiency(trace.gap_history, epsilon);
  const double m = memorability(
      [&] {
        std::vector<double> h;
        for (const TraceRule& r : trace.rules) h.push_back(r.entropy);
        return h;
      }(),
      e);
  out += e ? fmt::format("E_eps = {} (reached)\n", *e) : std::string("E_eps = inf (not reached)\n");
  out += fmt::format("M_eps = {:.4f} nats ({:.4f} bits)\n", m, toBits(m));
  out += "Entanglement (feature gap crossing epsilon vs. iteration learned):\n";
  for (const EntanglementEntry& en : entanglementReport(trace, epsilon)) {
    out += fmt::format("  {:>3}  {:<16} crossing {:>4}  {}\n", en.learned_at, en.feature.str(),
                       en.crossing ? std::to_string(*en.crossing) : std::string("-"),
                       en.entangled ? "ENTANGLED" : "INDEPENDENT");
  }
  out += "Rules:\n";
  for (const TraceRule& r : trace.rules) {
    if (r.cond_target) {
      out += fmt::format("  [{}] {}\n", r.learned_at, r.feature.str());
      std::istringstream lines(renderBigramRule(r.feature, *r.cond_target));
      for (std::string line; std::getline(lines, line);) out += "      " + line + "\n";
    } else {
      out += fmt::format("  [{}] {}\n", r.learned_at, renderRule(r.feature, r.target));
    }
  }
  return out;
}

void writeFile(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string readFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void writeArtifacts(RuleBook book, std::span<const TraceArtifact> traces,
                    const DiffReport* diff, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::string report = fmt::format("Corpus fingerprint: {}\nRule book: {} unigram rules, {} bigram rules\n\n",
                                   book.corpus_fingerprint, book.unigram.size(), book.bigram.size());
  for (const TraceArtifact& t : traces) {
    const std::string trace_name = "trace_" + t.tag + ".json";
    writeFile(out_dir / trace_name, traceToJson(*t.trace));
    writeFile(out_dir / ("footprints_" + t.tag + ".csv"), footprintsCsv(*t.trace));
    if (t.student != nullptr) {
      writeFile(out_dir / ("student_" + t.tag + ".json"), studentToJson(*t.student));
    }
    if (std::find(book.traces.begin(), book.traces.end(), trace_name) == book.traces.end()) {
      book.traces.push_back(trace_name);
    }
    report += traceReport(*t.trace, t.trace->config.epsilon) + "\n";
  }
  if (diff != nullptr) report += renderDiffReport(*diff);
  writeFile(out_dir / "rulebook.json", ruleBookToJson(book));
  writeFile(out_dir / "report.txt", report);
}

}  // namespace musrover
