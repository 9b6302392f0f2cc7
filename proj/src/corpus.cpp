// Corpus parsing, validation, transposition and gcd columnization.

#include "musrover/corpus.h"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "musrover/error.h"

namespace musrover {

namespace {

using nlohmann::json;

constexpr int kMinMidi = 0;
constexpr int kMaxMidi = 127;

std::string where(const std::string& id, int voice) {
  return fmt::format("piece '{}' voice {}", id, voice + 1);
}

std::int64_t voiceDuration(const std::vector<Note>& notes) {
  std::int64_t total = 0;
  for (const Note& n : notes) total += n.dur;
  return total;
}

}  // namespace

Omega::Omega(const std::array<VoiceRange, kVoiceCount>& ranges) : ranges_(ranges) {
  std::size_t stride = 1;
  for (int v = kVoiceCount - 1; v >= 0; --v) {
    strides_[v] = stride;
    stride *= static_cast<std::size_t>(ranges_[v].size());
  }
  size_ = stride;
}

bool Omega::contains(const Sonority& s) const {
  for (int v = 0; v < kVoiceCount; ++v) {
    if (s[v] < ranges_[v].lo || s[v] > ranges_[v].hi) return false;
  }
  return true;
}

std::size_t Omega::encode(const Sonority& s) const {
  std::size_t index = 0;
  for (int v = 0; v < kVoiceCount; ++v) {
    index += static_cast<std::size_t>(s[v] - ranges_[v].lo) * strides_[v];
  }
  return index;
}

Sonority Omega::decode(std::size_t index) const {
  Sonority s{};
  for (int v = 0; v < kVoiceCount; ++v) {
    s[v] = ranges_[v].lo + static_cast<int>(index / strides_[v]);
    index %= strides_[v];
  }
  return s;
}

void validatePiece(const Piece& piece) {
  std::int64_t expected = -1;
  for (int v = 0; v < kVoiceCount; ++v) {
    const auto& notes = piece.voices[v];
    if (notes.empty()) throw DataError(where(piece.id, v) + ": voice is empty");
    for (const Note& n : notes) {
      if (n.midi < kMinMidi || n.midi > kMaxMidi) {
        throw DataError(fmt::format("{}: midi {} out of range [0,127]",
                                    where(piece.id, v), n.midi));
      }
      if (n.dur < 1) {
        throw DataError(fmt::format("{}: duration {} is not positive",
                                    where(piece.id, v), n.dur));
      }
    }
    std::int64_t total = voiceDuration(notes);
    if (expected < 0) {
      expected = total;
    } else if (total != expected) {
      throw DataError(fmt::format(
          "{}: unequal voice durations ({} ticks, voice 1 has {})",
          where(piece.id, v), total, expected));
    }
  }
}

Piece transposePiece(const Piece& piece, int semitones) {
  Piece out = piece;
  for (int v = 0; v < kVoiceCount; ++v) {
    for (Note& n : out.voices[v]) {
      int shifted = n.midi + semitones;
      if (shifted < kMinMidi || shifted > kMaxMidi) {
        throw DataError(fmt::format(
            "{}: transposing midi {} by {} leaves the range [0,127]",
            where(piece.id, v), n.midi, semitones));
      }
      n.midi = shifted;
    }
  }
  return out;
}

SonorityMatrix columnize(const Piece& piece) {
  int unit = 0;
  for (const auto& notes : piece.voices) {
    for (const Note& n : notes) unit = std::gcd(unit, n.dur);
  }
  SonorityMatrix matrix;
  matrix.unit = std::max(unit, 1);
  std::size_t length =
      static_cast<std::size_t>(voiceDuration(piece.voices[0]) / matrix.unit);
  matrix.columns.assign(length, Sonority{});
  for (int v = 0; v < kVoiceCount; ++v) {
    std::size_t t = 0;
    for (const Note& n : piece.voices[v]) {
      for (int c = 0; c < n.dur / matrix.unit; ++c) matrix.columns[t++][v] = n.midi;
    }
  }
  return matrix;
}

std::vector<Piece> parsePieces(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(fmt::format("malformed corpus JSON: {}", e.what()));
  }
  if (!doc.is_object() || !doc.contains("pieces") || !doc["pieces"].is_array()) {
    throw DataError("malformed corpus JSON: expected an object with a \"pieces\" array");
  }
  std::vector<Piece> pieces;
  std::size_t ordinal = 0;
  for (const json& jp : doc["pieces"]) {
    ++ordinal;
    Piece piece;
    if (!jp.is_object()) {
      throw DataError(fmt::format("malformed corpus JSON: piece #{} is not an object", ordinal));
    }
    if (jp.contains("id") && jp["id"].is_string()) {
      piece.id = jp["id"].get<std::string>();
    } else {
      throw DataError(fmt::format("malformed corpus JSON: piece #{} has no string id", ordinal));
    }
    if (jp.contains("transpose")) {
      if (!jp["transpose"].is_number_integer()) {
        throw DataError(fmt::format("piece '{}': transpose must be an integer", piece.id));
      }
      piece.transpose = jp["transpose"].get<int>();
    }
    if (!jp.contains("voices") || !jp["voices"].is_array()) {
      throw DataError(fmt::format("piece '{}': missing voices array", piece.id));
    }
    const json& voices = jp["voices"];
    if (voices.size() != kVoiceCount) {
      throw DataError(fmt::format("piece '{}': voice count is {}, expected 4",
                                  piece.id, voices.size()));
    }
    for (int v = 0; v < kVoiceCount; ++v) {
      const json& jv = voices[v];
      if (!jv.is_array()) throw DataError(where(piece.id, v) + ": voice is not an array");
      for (const json& jn : jv) {
        if (!jn.is_array() || jn.size() != 2 || !jn[0].is_number_integer() ||
            !jn[1].is_number_integer()) {
          throw DataError(where(piece.id, v) + ": notes must be [midi, dur] integer pairs");
        }
        auto midi = jn[0].get<std::int64_t>();
        auto dur = jn[1].get<std::int64_t>();
        if (midi < kMinMidi || midi > kMaxMidi) {
          throw DataError(fmt::format("{}: midi {} out of range [0,127]", where(piece.id, v), midi));
        }
        if (dur < 1 || dur > std::numeric_limits<int>::max()) {
          throw DataError(fmt::format("{}: duration {} is not a positive integer",
                                      where(piece.id, v), dur));
        }
        piece.voices[v].push_back({static_cast<int>(midi), static_cast<int>(dur)});
      }
    }
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

std::string serializePieces(const std::vector<Piece>& pieces) {
  json doc;
  doc["pieces"] = json::array();
  for (const Piece& p : pieces) {
    json jp;
    jp["id"] = p.id;
    jp["transpose"] = p.transpose;
    jp["voices"] = json::array();
    for (const auto& notes : p.voices) {
      json jv = json::array();
      for (const Note& n : notes) jv.push_back({n.midi, n.dur});
      jp["voices"].push_back(std::move(jv));
    }
    doc["pieces"].push_back(std::move(jp));
  }
  return doc.dump();
}

CorpusModel buildCorpus(const std::vector<Piece>& pieces, const CorpusOptions& options) {
  CorpusModel corpus;
  corpus.fingerprint = sha256Hex(serializePieces(pieces));
  std::array<VoiceRange, kVoiceCount> ranges;
  ranges.fill({std::numeric_limits<int>::max(), std::numeric_limits<int>::min()});
  for (const Piece& raw : pieces) {
    validatePiece(raw);
    Piece piece = raw.transpose == 0 ? raw : transposePiece(raw, raw.transpose);
    ColumnizedPiece cp{piece.id, columnize(piece)};
    for (const Sonority& s : cp.matrix.columns) {
      for (int v = 0; v < kVoiceCount; ++v) {
        ranges[v].lo = std::min(ranges[v].lo, s[v]);
        ranges[v].hi = std::max(ranges[v].hi, s[v]);
      }
    }
    corpus.column_count += cp.matrix.columns.size();
    corpus.pieces.push_back(std::move(cp));
  }
  if (corpus.pieces.empty()) return corpus;

  double omega_size = 1.0;
  for (const VoiceRange& r : ranges) omega_size *= r.size();
  if (omega_size > static_cast<double>(options.max_omega)) {
    throw DataError(fmt::format("raw alphabet has {} states, above max_omega {}",
                                omega_size, options.max_omega));
  }
  corpus.omega = Omega(ranges);
  return corpus;
}

CorpusModel parseCorpus(std::string_view text, const CorpusOptions& options) {
  return buildCorpus(parsePieces(text), options);
}

CorpusModel loadCorpus(const std::string& path, const CorpusOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot read corpus file '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parseCorpus(buf.str(), options);
}

SonorityStream sonorityStream(const CorpusModel& corpus, bool merge_repeats) {
  if (corpus.pieces.empty() || corpus.column_count == 0) {
    throw DataError("empty corpus");
  }
  SonorityStream stream;
  for (const ColumnizedPiece& piece : corpus.pieces) {
    std::vector<Sonority> seq;
    seq.reserve(piece.matrix.columns.size());
    for (const Sonority& s : piece.matrix.columns) {
      if (merge_repeats && !seq.empty() && seq.back() == s) continue;
      seq.push_back(s);
    }
    for (std::size_t t = 0; t < seq.size(); ++t) {
      std::size_t x = corpus.omega.encode(seq[t]);
      ++stream.unigram[x];
      if (t > 0) ++stream.bigram[{corpus.omega.encode(seq[t - 1]), x}];
    }
    stream.sequences.push_back(std::move(seq));
  }
  return stream;
}

std::string sha256Hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr);
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

}  // namespace musrover
