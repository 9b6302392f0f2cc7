// Artifact emission: trace/student JSON, footprint CSV, text report.

#ifndef MUSROVER_ARTIFACTS_H
#define MUSROVER_ARTIFACTS_H

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "musrover/loop.h"
#include "musrover/ngram.h"
#include "musrover/rulebook.h"
#include "musrover/student.h"

namespace musrover {

/// Shortest decimal rendering of alpha, used in file names ("0.5", "1").
std::string alphaTag(double alpha);

std::string traceToJson(const Trace& trace);
Trace traceFromJson(std::string_view text);

/// Header row of feature strings (after an "iteration" column), one row per iteration.
std::string footprintsCsv(const Trace& trace);

std::string studentToJson(const StudentModel& model);
StudentModel studentFromJson(std::string_view text);

/// Sampled columns as a one-piece corpus document (every note one tick).
std::string sequenceToCorpusJson(const std::vector<Sonority>& columns, const std::string& id);

/// E, M and the entanglement table for one trace.
std::string traceReport(const Trace& trace, double epsilon);

struct TraceArtifact {
  std::string tag;  ///< file-name suffix, e.g. "0.5" or "bigram_0.5"
  const Trace* trace = nullptr;
  const StudentModel* student = nullptr;
};

/// Writes rulebook.json, trace_<tag>.json, footprints_<tag>.csv,
/// student_<tag>.json and report.txt. Output is byte-stable for equal inputs.
void writeArtifacts(RuleBook book, std::span<const TraceArtifact> traces,
                    const DiffReport* diff, const std::filesystem::path& out_dir);

void writeFile(const std::filesystem::path& path, std::string_view contents);
std::string readFile(const std::filesystem::path& path);

}  // namespace musrover

#endif  // MUSROVER_ARTIFACTS_H
