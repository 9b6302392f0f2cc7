// Tests for the feature universe, feature evaluation and partitions.

#include <map>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "musrover/error.h"
#include "musrover/features.h"

namespace musrover {
namespace {

TEST(FeaturesTest, UniverseHas63FeaturesWithExpectedCounts) {
  const auto& all = enumerateFeatures();
  ASSERT_EQ(all.size(), 63u);
  std::map<Descriptor, int> counts;
  for (const Feature& f : all) counts[f.descriptor]++;
  EXPECT_EQ(counts[Descriptor::kPitch], 15);
  EXPECT_EQ(counts[Descriptor::kPitch12], 15);
  EXPECT_EQ(counts[Descriptor::kInterv], 11);
  EXPECT_EQ(counts[Descriptor::kInterv12], 11);
  EXPECT_EQ(counts[Descriptor::kOrder], 11);
  EXPECT_EQ(all.front().str(), "pitch@1");
  EXPECT_EQ(all.back().str(), "order@3,4");
}

TEST(FeaturesTest, OrderCountMatchesSubsetEnumeration) {
  // Count subsets of {1,2,3,4} with at least two voices by bitmask.
  int subsets = 0;
  for (int mask = 1; mask < 16; ++mask) {
    if (__builtin_popcount(mask) >= 2) ++subsets;
  }
  int order = 0;
  for (const Feature& f : enumerateFeatures()) order += f.descriptor == Descriptor::kOrder;
  EXPECT_EQ(order, subsets);
}

TEST(FeaturesTest, CanonicalOrderAndUniqueness) {
  std::set<std::string> seen;
  const auto& all = enumerateFeatures();
  for (std::size_t i = 0; i < all.size(); ++i) {
    EXPECT_TRUE(seen.insert(all[i].str()).second);
    EXPECT_EQ(featureIndex(all[i]), i);
    if (i > 0 && all[i].descriptor == all[i - 1].descriptor) {
      EXPECT_LT(all[i - 1].window, all[i].window);
    }
  }
  EXPECT_TRUE(all[featureIndex(rawFeature())].isRaw());
  EXPECT_EQ(rawFeature().str(), "pitch@1,2,3,4");
}

TEST(FeaturesTest, ApplyFeatureExamples) {
  Feature ic = parseFeature("interv12@1,4");
  FeatureValue tt = applyFeature(ic, {65, 60, 55, 47});
  ASSERT_EQ(tt.size, 1);
  EXPECT_EQ(tt.data[0], 6);
  EXPECT_EQ(valueLabel(tt), "TT");
  FeatureValue m7 = applyFeature(ic, {65, 60, 55, 43});
  EXPECT_EQ(m7.data[0], 10);
  EXPECT_EQ(valueLabel(m7), "m7");

  FeatureValue pc = applyFeature(parseFeature("pitch12@1"), {60, 57, 52, 48});
  EXPECT_EQ(pc.data[0], 0);
  EXPECT_EQ(valueLabel(pc), "C");

  FeatureValue ord = applyFeature(parseFeature("order@1,2,3,4"), {72, 67, 64, 48});
  ASSERT_EQ(ord.size, 3);
  EXPECT_EQ(ord.data[0], 1);
  EXPECT_EQ(ord.data[1], 1);
  EXPECT_EQ(ord.data[2], 1);
  EXPECT_EQ(valueLabel(ord), "+ + +");

  FeatureValue iv = applyFeature(parseFeature("interv@1,3,4"), {72, 67, 64, 48});
  ASSERT_EQ(iv.size, 2);
  EXPECT_EQ(iv.data[0], 8);
  EXPECT_EQ(iv.data[1], 16);
}

TEST(FeaturesTest, IntervalClassIsNonNegativeModulo) {
  // Bass above soprano still maps into 0..11.
  FeatureValue v = applyFeature(parseFeature("interv12@1,4"), {48, 50, 52, 55});
  EXPECT_EQ(v.data[0], 5);
}

TEST(FeaturesTest, TranspositionInvariance) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pitch(30, 90), shift(-24, 24);
  for (int trial = 0; trial < 200; ++trial) {
    Sonority s;
    for (int& x : s) x = pitch(rng);
    int k = shift(rng);
    Sonority t = s;
    for (int& x : t) x += k;
    for (const Feature& f : enumerateFeatures()) {
      bool invariant = f.descriptor == Descriptor::kInterv ||
                       f.descriptor == Descriptor::kInterv12 ||
                       f.descriptor == Descriptor::kOrder ||
                       (f.descriptor == Descriptor::kPitch12 && k % 12 == 0);
      if (invariant) EXPECT_EQ(applyFeature(f, s), applyFeature(f, t)) << f.str();
    }
  }
}

TEST(FeaturesTest, DescribeFeature) {
  EXPECT_EQ(describeFeature(parseFeature("interv12@1,4")),
            "interval class (semitone distance mod 12) between soprano and bass");
  EXPECT_EQ(describeFeature(parseFeature("pitch12@1")), "pitch class of the soprano");
  EXPECT_EQ(describeFeature(parseFeature("order@2,3")),
            "relative ordering (above/equal/below) of alto vs tenor");
}

TEST(FeaturesTest, ParseFeature) {
  Feature f = parseFeature("interv12@1,4");
  EXPECT_EQ(f.descriptor, Descriptor::kInterv12);
  EXPECT_EQ(f.window.voices(), (std::vector<int>{1, 4}));
  EXPECT_THROW(parseFeature("order@3"), DataError);
  EXPECT_THROW(parseFeature("pitch@2,1"), DataError);
  EXPECT_THROW(parseFeature("pitch@1,5"), DataError);
  EXPECT_THROW(parseFeature("chord@1"), DataError);
  EXPECT_THROW(parseFeature("pitch"), DataError);
  EXPECT_TRUE(parseFeature("pitch@1,2,3,4").isRaw());
  for (const Feature& g : enumerateFeatures()) EXPECT_EQ(parseFeature(g.str()), g);
}

Omega smallOmega() {
  return Omega({VoiceRange{60, 61}, VoiceRange{58, 60}, VoiceRange{55, 56}, VoiceRange{59, 60}});
}

TEST(FeaturesTest, RawPartitionIsSingletons) {
  Omega omega = smallOmega();
  Partition part(rawFeature(), omega);
  ASSERT_EQ(part.cellCount(), omega.size());
  for (std::size_t i = 0; i < omega.size(); ++i) EXPECT_EQ(part.cellSizes()[i], 1u);
}

TEST(FeaturesTest, OrderPartitionMatchesEnumeration) {
  Omega omega = smallOmega();
  Feature f = parseFeature("order@1,4");
  Partition part(f, omega);
  // Enumerate the omega elements and bucket by order directly.
  std::map<int, std::size_t> expected;
  for (std::size_t i = 0; i < omega.size(); ++i) {
    Sonority s = omega.decode(i);
    int sign = s[0] > s[3] ? 1 : (s[0] == s[3] ? 0 : -1);
    expected[sign]++;
  }
  ASSERT_EQ(part.cellCount(), expected.size());
  for (std::size_t c = 0; c < part.cellCount(); ++c) {
    EXPECT_EQ(part.cellSizes()[c], expected[part.values()[c].data[0]]);
  }
}

TEST(FeaturesTest, PartitionsAgreeWithApplyFeature) {
  Omega omega = smallOmega();
  for (const Feature& f : enumerateFeatures()) {
    Partition part(f, omega);
    std::size_t total = 0;
    for (std::size_t n : part.cellSizes()) total += n;
    EXPECT_EQ(total, omega.size()) << f.str();
    std::vector<std::int32_t> cells = part.materialize();
    for (std::size_t i = 0; i < omega.size(); ++i) {
      ASSERT_EQ(part.values()[cells[i]], applyFeature(f, omega.decode(i))) << f.str();
      ASSERT_EQ(part.cellOf(i), cells[i]);
    }
    for (std::size_t c = 1; c < part.cellCount(); ++c) {
      EXPECT_LT(part.values()[c - 1], part.values()[c]);
    }
  }
}

TEST(FeaturesTest, PushforwardExamples) {
  Omega omega = smallOmega();
  Feature f = parseFeature("pitch@1");
  Partition part(f, omega);
  std::vector<double> uniform(omega.size(), 1.0 / omega.size());
  std::vector<double> q = pushforward(uniform, part);
  ASSERT_EQ(q.size(), 2u);
  EXPECT_DOUBLE_EQ(q[0], 0.5);

  std::vector<std::int32_t> cells = {0, 0, 0, 1};
  std::vector<double> u4(4, 0.25);
  std::vector<double> q2 = pushforward(u4, cells, 2);
  EXPECT_DOUBLE_EQ(q2[0], 0.75);
  EXPECT_DOUBLE_EQ(q2[1], 0.25);

  std::vector<double> delta(omega.size(), 0.0);
  delta[7] = 1.0;
  Feature g = parseFeature("interv@2,3,4");
  Partition pg(g, omega);
  std::vector<double> qd = pushforward(delta, pg);
  std::int64_t cell = pg.indexOf(applyFeature(g, omega.decode(7)));
  ASSERT_GE(cell, 0);
  EXPECT_DOUBLE_EQ(qd[cell], 1.0);
}

TEST(FeaturesTest, FeatureSpaceCachesPartitions) {
  FeatureSpace space(smallOmega());
  const Partition& a = space.partition(5);
  const Partition& b = space.partition(enumerateFeatures()[5]);
  EXPECT_EQ(&a, &b);
  EXPECT_EQ(space.cellsOf(5).size(), space.omega().size());
}

}  // namespace
}  // namespace musrover
