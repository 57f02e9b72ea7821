#include "paxconnect/domain.h"

#include <algorithm>
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "test_support.h"

namespace paxconnect {
namespace {

using testing::MakeRecord;

std::vector<std::string> Names(const std::vector<Feature>& features) {
  std::vector<std::string> names;
  for (const Feature f : features) names.emplace_back(FeatureName(f));
  return names;
}

bool Contains(const std::vector<Feature>& features, Feature f) {
  return std::find(features.begin(), features.end(), f) != features.end();
}

TEST(TrafficNetworkTest, SchengenPairs) {
  EXPECT_EQ(TrafficNetworkOf(true, false), TrafficNetwork::kSN);
  EXPECT_EQ(TrafficNetworkOf(true, true), TrafficNetwork::kSS);
  EXPECT_EQ(TrafficNetworkOf(false, false), TrafficNetwork::kNN);
  EXPECT_EQ(TrafficNetworkOf(false, true), TrafficNetwork::kNS);
}

TEST(TrafficNetworkTest, TotalAndInvertible) {
  std::set<TrafficNetwork> seen;
  for (const bool origin : {false, true}) {
    for (const bool destination : {false, true}) {
      const TrafficNetwork network = TrafficNetworkOf(origin, destination);
      seen.insert(network);
      EXPECT_EQ(SchengenFlags(network), std::make_pair(origin, destination));
      EXPECT_EQ(ParseTrafficNetwork(TrafficNetworkName(network)), network);
    }
  }
  EXPECT_EQ(seen.size(), 4u);
  EXPECT_FALSE(ParseTrafficNetwork("XX").has_value());
}

TEST(ConnectionTimesTest, ArrivalDelayOfTenMinutes) {
  const ConnectionTimes t = ComputeConnectionTimes(MakeRecord(10, 0));
  EXPECT_EQ(t.scheduled, 60);
  EXPECT_EQ(t.perceived, 50);
  EXPECT_EQ(t.actual, 50);
}

TEST(ConnectionTimesTest, AllTimestampsEqual) {
  ConnectionRecord r = MakeRecord();
  r.actual_on_blocks = r.scheduled_on_blocks;
  r.scheduled_off_blocks = r.scheduled_on_blocks;
  r.actual_off_blocks = r.scheduled_on_blocks;
  const ConnectionTimes t = ComputeConnectionTimes(r);
  EXPECT_EQ(t.scheduled, 0);
  EXPECT_EQ(t.perceived, 0);
  EXPECT_EQ(t.actual, 0);
}

TEST(ConnectionTimesTest, ArrivalAfterScheduledDepartureIsNegative) {
  const ConnectionTimes t = ComputeConnectionTimes(MakeRecord(90, 0));
  EXPECT_EQ(t.perceived, -30);
}

TEST(ConnectionTimesTest, MissingTimestampOnlyAffectsItsQuantities) {
  ConnectionRecord r = MakeRecord(5, 3);
  r.actual_off_blocks.reset();
  ConnectionTimes t = ComputeConnectionTimes(r);
  EXPECT_EQ(t.scheduled, 60);
  EXPECT_EQ(t.perceived, 55);
  EXPECT_FALSE(t.actual.has_value());

  r.actual_on_blocks.reset();
  t = ComputeConnectionTimes(r);
  EXPECT_EQ(t.scheduled, 60);
  EXPECT_FALSE(t.perceived.has_value());
}

TEST(ConnectionTimesTest, PerceivedIdentityHolds) {
  for (const Minutes delay : {-20, 0, 7, 45, 300}) {
    const ConnectionRecord r = MakeRecord(delay, 12);
    const ConnectionTimes t = ComputeConnectionTimes(r);
    EXPECT_EQ(*t.perceived,
              *t.scheduled - (*r.actual_on_blocks - *r.scheduled_on_blocks));
  }
}

TEST(StageFeaturesTest, Strategic) {
  const auto features = StageFeatures(DsmStage::kStrategic);
  EXPECT_EQ(Names(features),
            (std::vector<std::string>{"TP From", "TP To", "Traffic Network",
                                      "Dep. Day", "Dep. Month Day",
                                      "Sch. Conn. Time"}));
  EXPECT_FALSE(Contains(features, Feature::kAge));
}

TEST(StageFeaturesTest, PreTacticalAddsPassengerFields) {
  const auto features = StageFeatures(DsmStage::kPreTactical);
  EXPECT_EQ(features.size(), 11u);
  for (const Feature f : StageFeatures(DsmStage::kStrategic)) {
    EXPECT_TRUE(Contains(features, f)) << FeatureName(f);
  }
  for (const Feature f : {Feature::kSex, Feature::kAge, Feature::kIsGroup,
                          Feature::kClassFrom, Feature::kClassTo}) {
    EXPECT_TRUE(Contains(features, f)) << FeatureName(f);
  }
}

TEST(StageFeaturesTest, TacticalSwapsInPerceivedTime) {
  const auto features = StageFeatures(DsmStage::kTactical);
  EXPECT_TRUE(Contains(features, Feature::kPerceivedConnTime));
  EXPECT_FALSE(Contains(features, Feature::kSchConnTime));
  EXPECT_EQ(features.size(), 11u);
}

TEST(StageFeaturesTest, PostOperations) {
  const auto features = StageFeatures(DsmStage::kPostOperations);
  EXPECT_TRUE(Contains(features, Feature::kNBus));
  EXPECT_TRUE(Contains(features, Feature::kBoardingDelta));
  EXPECT_TRUE(Contains(features, Feature::kActualConnTime));
  EXPECT_FALSE(Contains(features, Feature::kPerceivedConnTime));
  EXPECT_EQ(features.size(), 13u);
}

TEST(StageFeaturesTest, ConnectionTimeColumnIsLast) {
  for (const DsmStage stage : kAllStages) {
    const auto features = StageFeatures(stage);
    EXPECT_EQ(features.back(), ConnectionTimeFeature(stage));
    const std::set<Feature> unique(features.begin(), features.end());
    EXPECT_EQ(unique.size(), features.size());
  }
}

TEST(StageFeaturesTest, InformationGrowsAcrossStages) {
  auto without_time = [](DsmStage stage) {
    std::set<Feature> set;
    for (const Feature f : StageFeatures(stage)) {
      if (f != ConnectionTimeFeature(stage)) set.insert(f);
    }
    return set;
  };
  const DsmStage order[] = {DsmStage::kStrategic, DsmStage::kPreTactical,
                            DsmStage::kTactical, DsmStage::kPostOperations};
  for (int i = 0; i + 1 < 4; ++i) {
    const auto earlier = without_time(order[i]);
    const auto later = without_time(order[i + 1]);
    EXPECT_TRUE(std::includes(later.begin(), later.end(), earlier.begin(),
                              earlier.end()))
        << StageName(order[i]);
  }
}

TEST(StageTest, ParseAndTimeKinds) {
  EXPECT_EQ(ParseStage("Pre-Tactical"), DsmStage::kPreTactical);
  EXPECT_EQ(ParseStage("postoperations"), DsmStage::kPostOperations);
  EXPECT_FALSE(ParseStage("operational").has_value());
  for (const DsmStage stage : kAllStages) {
    EXPECT_EQ(ParseStage(StageName(stage)), stage);
  }
  EXPECT_EQ(ConnectionTimeKindOf(DsmStage::kStrategic),
            ConnectionTimeKind::kScheduled);
  EXPECT_EQ(ConnectionTimeKindOf(DsmStage::kPreTactical),
            ConnectionTimeKind::kScheduled);
  EXPECT_EQ(ConnectionTimeKindOf(DsmStage::kTactical),
            ConnectionTimeKind::kPerceived);
  EXPECT_EQ(ConnectionTimeKindOf(DsmStage::kPostOperations),
            ConnectionTimeKind::kActual);
}

TEST(FeatureTest, NamesRoundTrip) {
  for (int i = 0; i < kNumFeatures; ++i) {
    const auto f = static_cast<Feature>(i);
    EXPECT_EQ(ParseFeature(FeatureName(f)), f);
  }
  EXPECT_EQ(KindOf(Feature::kTrafficNetwork), FeatureKind::kCategorical);
  EXPECT_EQ(KindOf(Feature::kIsGroup), FeatureKind::kNumeric);
  EXPECT_EQ(KindOf(Feature::kAge), FeatureKind::kNumeric);
}

TEST(ExtractFeatureTest, TypedValues) {
  const ConnectionRecord r = MakeRecord(10, 0);
  EXPECT_EQ(std::get<std::string>(*ExtractFeature(r, Feature::kTrafficNetwork)),
            "SN");
  EXPECT_EQ(std::get<std::string>(*ExtractFeature(r, Feature::kSex)), "F");
  EXPECT_EQ(std::get<double>(*ExtractFeature(r, Feature::kIsGroup)), 0.0);
  EXPECT_EQ(std::get<double>(*ExtractFeature(r, Feature::kPerceivedConnTime)),
            50.0);
  ConnectionRecord partial = r;
  partial.destination_schengen.reset();
  EXPECT_FALSE(ExtractFeature(partial, Feature::kTrafficNetwork).has_value());
}

TEST(DomainInvariantsTest, RangeChecks) {
  EXPECT_TRUE(SatisfiesDomainInvariants(MakeRecord()));
  ConnectionRecord r = MakeRecord();
  r.departure_weekday = 7;
  EXPECT_FALSE(SatisfiesDomainInvariants(r));
  r = MakeRecord();
  r.departure_month_day = 0;
  EXPECT_FALSE(SatisfiesDomainInvariants(r));
  r = MakeRecord();
  r.scheduled_off_blocks = *r.scheduled_on_blocks - 1;
  EXPECT_FALSE(SatisfiesDomainInvariants(r));
}

}  // namespace
}  // namespace paxconnect
