// Corpus ingestion: four-voice pieces, gcd columnization and the raw alphabet.

#ifndef MUSROVER_CORPUS_H
#define MUSROVER_CORPUS_H

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace musrover {

inline constexpr int kVoiceCount = 4;

struct Note {
  int midi = 0;  ///< MIDI pitch, C4 = 60.
  int dur = 1;   ///< Duration in ticks.

  bool operator==(const Note&) const = default;
};

/// One SATB piece. voices[0] is the soprano, voices[3] the bass.
struct Piece {
  std::string id;
  int transpose = 0;
  std::array<std::vector<Note>, kVoiceCount> voices;

  bool operator==(const Piece&) const = default;
};

/// Pitches sounding in one unit-duration column, indexed by voice (0 = soprano).
using Sonority = std::array<int, kVoiceCount>;

struct SonorityMatrix {
  std::vector<Sonority> columns;
  int unit = 1;  ///< gcd of all note durations, in ticks.
};

/// Inclusive MIDI range observed for one voice.
struct VoiceRange {
  int lo = 0;
  int hi = 0;

  int size() const { return hi - lo + 1; }
  bool operator==(const VoiceRange&) const = default;
};

/// The raw alphabet: the Cartesian product of per-voice pitch ranges.
///
/// Sonorities are indexed in mixed radix with the soprano most significant, so
/// index order coincides with lexicographic order of the pitch tuples.
class Omega {
 public:
  Omega() = default;
  explicit Omega(const std::array<VoiceRange, kVoiceCount>& ranges);

  std::size_t size() const { return size_; }
  const VoiceRange& range(int voice) const { return ranges_[voice]; }
  const std::array<VoiceRange, kVoiceCount>& ranges() const { return ranges_; }
  std::size_t stride(int voice) const { return strides_[voice]; }

  bool contains(const Sonority& s) const;
  std::size_t encode(const Sonority& s) const;
  Sonority decode(std::size_t index) const;

  bool operator==(const Omega& other) const { return ranges_ == other.ranges_; }

 private:
  std::array<VoiceRange, kVoiceCount> ranges_{};
  std::array<std::size_t, kVoiceCount> strides_{};
  std::size_t size_ = 0;
};

struct ColumnizedPiece {
  std::string id;
  SonorityMatrix matrix;
};

struct CorpusModel {
  std::vector<ColumnizedPiece> pieces;
  Omega omega;
  std::size_t column_count = 0;
  std::string fingerprint;  ///< SHA-256 of the canonical corpus JSON.
};

struct CorpusOptions {
  std::size_t max_omega = 2'000'000;
};

/// Sparse counts over omega indices; ordered maps keep every downstream
/// iteration deterministic.
using UnigramCounts = std::map<std::size_t, std::int64_t>;
using BigramCounts = std::map<std::pair<std::size_t, std::size_t>, std::int64_t>;

struct SonorityStream {
  std::vector<std::vector<Sonority>> sequences;
  UnigramCounts unigram;
  BigramCounts bigram;
};

/// Checks the Piece invariants; throws DataError naming the piece and voice.
void validatePiece(const Piece& piece);

Piece transposePiece(const Piece& piece, int semitones);

SonorityMatrix columnize(const Piece& piece);

/// Parses the corpus JSON document into raw (untransposed) pieces.
std::vector<Piece> parsePieces(std::string_view text);

/// Canonical JSON rendering of pieces; parsePieces(serializePieces(p)) == p.
std::string serializePieces(const std::vector<Piece>& pieces);

/// Validates, transposes and columnizes pieces, then derives omega.
CorpusModel buildCorpus(const std::vector<Piece>& pieces,
                        const CorpusOptions& options = {});

CorpusModel parseCorpus(std::string_view text, const CorpusOptions& options = {});

CorpusModel loadCorpus(const std::string& path, const CorpusOptions& options = {});

SonorityStream sonorityStream(const CorpusModel& corpus, bool merge_repeats = false);

/// Hex SHA-256 digest.
std::string sha256Hex(std::string_view bytes);

}  // namespace musrover

#endif  // MUSROVER_CORPUS_H
