// Tests for corpus parsing, validation, columnization and sonority streams.

#include <gtest/gtest.h>

#include "musrover/corpus.h"
#include "musrover/error.h"
#include "test_util.h"

namespace musrover {
namespace {

using testing::corpusFromSequences;
using testing::pieceFromColumns;

Piece fourVoices(std::vector<Note> s, std::vector<Note> a, std::vector<Note> t,
                 std::vector<Note> b) {
  Piece p;
  p.id = "x";
  p.voices = {std::move(s), std::move(a), std::move(t), std::move(b)};
  return p;
}

TEST(CorpusTest, SingleNotePieceGivesOneColumn) {
  CorpusModel c = parseCorpus(
      R"({"pieces":[{"id":"a","voices":[[[60,1]],[[60,1]],[[60,1]],[[60,1]]]}]})");
  ASSERT_EQ(c.column_count, 1u);
  EXPECT_EQ(c.pieces[0].matrix.columns[0], (Sonority{60, 60, 60, 60}));
  EXPECT_EQ(c.omega.size(), 1u);
}

TEST(CorpusTest, UnequalVoiceDurationsRejected) {
  Piece p = fourVoices({{60, 2}}, {{60, 2}}, {{60, 2}}, {{60, 3}});
  try {
    validatePiece(p);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("unequal voice durations"), std::string::npos);
  }
}

TEST(CorpusTest, TransposeShiftsStoredPitches) {
  CorpusModel c = parseCorpus(
      R"({"pieces":[{"id":"a","transpose":-2,"voices":[[[62,1]],[[55,1]],[[52,1]],[[48,1]]]}]})");
  EXPECT_EQ(c.pieces[0].matrix.columns[0][0], 60);
  EXPECT_EQ(c.pieces[0].matrix.columns[0][3], 46);
}

TEST(CorpusTest, ColumnizeExpandsToGcdUnit) {
  Piece p = fourVoices({{72, 2}}, {{67, 2}}, {{64, 1}, {62, 1}}, {{48, 2}});
  SonorityMatrix m = columnize(p);
  EXPECT_EQ(m.unit, 1);
  ASSERT_EQ(m.columns.size(), 2u);
  EXPECT_EQ(m.columns[0], (Sonority{72, 67, 64, 48}));
  EXPECT_EQ(m.columns[1], (Sonority{72, 67, 62, 48}));
}

TEST(CorpusTest, ColumnizeAllFourTicks) {
  Piece p = fourVoices({{72, 4}, {74, 4}}, {{67, 4}, {67, 4}}, {{64, 8}}, {{48, 4}, {47, 4}});
  SonorityMatrix m = columnize(p);
  EXPECT_EQ(m.unit, 4);
  ASSERT_EQ(m.columns.size(), 2u);
  EXPECT_EQ(m.columns[1], (Sonority{74, 67, 64, 47}));
}

TEST(CorpusTest, LongNoteSpansSeveralColumns) {
  Piece p = fourVoices({{60, 6}}, {{57, 3}, {55, 3}}, {{52, 3}, {52, 3}}, {{48, 3}, {43, 3}});
  SonorityMatrix m = columnize(p);
  EXPECT_EQ(m.unit, 3);
  ASSERT_EQ(m.columns.size(), 2u);
  EXPECT_EQ(m.columns[0][0], 60);
  EXPECT_EQ(m.columns[1][0], 60);
}

TEST(CorpusTest, TransposeIdentityAndInverse) {
  Piece p = fourVoices({{72, 1}}, {{67, 1}}, {{64, 1}}, {{48, 1}});
  EXPECT_EQ(transposePiece(p, 0), p);
  EXPECT_EQ(transposePiece(transposePiece(p, 12), -12), p);
}

TEST(CorpusTest, TransposeOutOfRangeRejected) {
  Piece p = fourVoices({{120, 1}}, {{67, 1}}, {{64, 1}}, {{48, 1}});
  EXPECT_THROW(transposePiece(p, 12), DataError);
}

TEST(CorpusTest, MalformedInputsRejected) {
  EXPECT_THROW(parseCorpus("not json"), DataError);
  EXPECT_THROW(parseCorpus(R"({"pieces":[{"id":"a","voices":[[[60,1]],[[60,1]],[[60,1]]]}]})"),
               DataError);
  EXPECT_THROW(
      parseCorpus(R"({"pieces":[{"id":"a","voices":[[[60,0]],[[60,1]],[[60,1]],[[60,1]]]}]})"),
      DataError);
  EXPECT_THROW(
      parseCorpus(R"({"pieces":[{"id":"a","voices":[[[128,1]],[[60,1]],[[60,1]],[[60,1]]]}]})"),
      DataError);
  EXPECT_THROW(parseCorpus(R"({"pieces":[{"id":"a","voices":[[],[[60,1]],[[60,1]],[[60,1]]]}]})"),
               DataError);
}

TEST(CorpusTest, OmegaLimitEnforced) {
  std::vector<Sonority> cols = {{60, 50, 40, 30}, {80, 70, 60, 50}};
  EXPECT_THROW(corpusFromSequences({cols}, {1000}), DataError);
  EXPECT_EQ(corpusFromSequences({cols}, {21 * 21 * 21 * 21}).omega.size(), 194481u);
}

TEST(CorpusTest, OmegaEncodingIsLexicographic) {
  Omega omega({VoiceRange{60, 62}, VoiceRange{55, 56}, VoiceRange{50, 50}, VoiceRange{40, 43}});
  ASSERT_EQ(omega.size(), 24u);
  std::size_t prev = 0;
  bool first = true;
  for (int s = 60; s <= 62; ++s) {
    for (int a = 55; a <= 56; ++a) {
      for (int b = 40; b <= 43; ++b) {
        Sonority x = {s, a, 50, b};
        std::size_t i = omega.encode(x);
        if (!first) EXPECT_EQ(i, prev + 1);
        EXPECT_EQ(omega.decode(i), x);
        prev = i;
        first = false;
      }
    }
  }
  EXPECT_FALSE(omega.contains({63, 55, 50, 40}));
}

TEST(CorpusTest, StreamCounts) {
  Sonority a = {72, 67, 64, 48}, b = {71, 67, 62, 43}, c = {72, 64, 60, 48};
  CorpusModel corpus = corpusFromSequences({{a, b, c}, {c, b, a}});
  SonorityStream s = sonorityStream(corpus);
  std::int64_t uni = 0, bi = 0;
  for (const auto& [k, n] : s.unigram) uni += n;
  for (const auto& [k, n] : s.bigram) bi += n;
  EXPECT_EQ(uni, 6);
  EXPECT_EQ(bi, 4);
}

TEST(CorpusTest, MergeRepeatsCollapsesAdjacentDuplicates) {
  Sonority a = {72, 67, 64, 48}, b = {71, 67, 62, 43};
  CorpusModel corpus = corpusFromSequences({{a, a, b}});
  const Omega& o = corpus.omega;
  SonorityStream plain = sonorityStream(corpus, false);
  EXPECT_EQ(plain.bigram.size(), 2u);
  EXPECT_EQ(plain.bigram.at({o.encode(a), o.encode(a)}), 1);
  EXPECT_EQ(plain.bigram.at({o.encode(a), o.encode(b)}), 1);
  SonorityStream merged = sonorityStream(corpus, true);
  ASSERT_EQ(merged.bigram.size(), 1u);
  EXPECT_EQ(merged.bigram.begin()->first, std::make_pair(o.encode(a), o.encode(b)));
}

TEST(CorpusTest, EmptyCorpusStreamRejected) {
  CorpusModel corpus = parseCorpus(R"({"pieces":[]})");
  EXPECT_THROW(sonorityStream(corpus), DataError);
}

TEST(CorpusTest, RoundTripAndFingerprint) {
  Piece p = pieceFromColumns("a", {{72, 67, 64, 48}, {71, 67, 62, 43}});
  std::string text = serializePieces({p});
  EXPECT_EQ(parsePieces(text), std::vector<Piece>{p});
  CorpusModel c1 = parseCorpus(text);
  CorpusModel c2 = buildCorpus({p});
  EXPECT_EQ(c1.fingerprint, c2.fingerprint);
  EXPECT_EQ(c1.fingerprint.size(), 64u);
  Piece q = p;
  q.voices[0][0].midi = 74;
  EXPECT_NE(buildCorpus({q}).fingerprint, c1.fingerprint);
}

TEST(CorpusTest, Sha256KnownVector) {
  EXPECT_EQ(sha256Hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
}  // namespace musrover
