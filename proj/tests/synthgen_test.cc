#include "paxconnect/synthgen.h"

#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "paxconnect/errors.h"
#include "paxconnect/ingest.h"

namespace paxconnect::synth {
namespace {

double MinorityFraction(const std::vector<ConnectionRecord>& records) {
  std::size_t positives = 0;
  for (const auto& r : records) positives += r.missed ? 1 : 0;
  return static_cast<double>(positives) / static_cast<double>(records.size());
}

double StandardDeviation(const std::vector<double>& values) {
  double mean = 0.0;
  for (const double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (const double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

TEST(SynthgenTest, DefaultMinorityFraction) {
  SynthConfig config;
  config.seed = 1;
  config.n_rows = 100000;
  config.target_minority_fraction = 0.0585;
  const double fraction = MinorityFraction(Generate(config));
  EXPECT_GE(fraction, 0.053);
  EXPECT_LE(fraction, 0.063);
}

TEST(SynthgenTest, BalancedTarget) {
  SynthConfig config;
  config.seed = 1;
  config.n_rows = 100000;
  config.target_minority_fraction = 0.5;
  EXPECT_NEAR(MinorityFraction(Generate(config)), 0.5, 0.005);
}

TEST(SynthgenTest, SameConfigGivesIdenticalBytes) {
  SynthConfig config;
  config.seed = 42;
  config.n_rows = 3000;
  std::ostringstream first;
  std::ostringstream second;
  WriteCsv(first, Generate(config));
  WriteCsv(second, Generate(config));
  EXPECT_EQ(first.str(), second.str());

  config.seed = 43;
  std::ostringstream other;
  WriteCsv(other, Generate(config));
  EXPECT_NE(first.str(), other.str());
}

TEST(SynthgenTest, InvalidConfigurationIsRejected) {
  SynthConfig config;
  config.n_rows = 0;
  EXPECT_THROW(Generate(config), ConfigError);
  config = {};
  config.target_minority_fraction = 1.0;
  EXPECT_THROW(Generate(config), ConfigError);
  config = {};
  config.missingness_rate = 0.05;
  EXPECT_THROW(Generate(config), ConfigError);
  config = {};
  config.noise_scale = 0.0;
  EXPECT_THROW(Generate(config), ConfigError);
}

TEST(SynthgenTest, RecordsSatisfyDomainInvariants) {
  SynthConfig config;
  config.n_rows = 20000;
  for (const auto& r : Generate(config)) {
    ASSERT_TRUE(SatisfiesDomainInvariants(r));
  }
}

TEST(SynthgenTest, MissingnessRateIsHonoured) {
  SynthConfig config;
  config.n_rows = 50000;
  config.missingness_rate = 0.03;
  std::size_t incomplete = 0;
  for (const auto& r : Generate(config)) {
    const bool complete = r.age && r.sex && r.is_group && r.class_from &&
                          r.class_to && r.boarding_delta && r.n_bus &&
                          r.actual_on_blocks && r.actual_off_blocks;
    incomplete += complete ? 0 : 1;
  }
  const double expected = 0.03 * 50000;
  EXPECT_NEAR(static_cast<double>(incomplete), expected,
              4.0 * std::sqrt(expected));
}

TEST(SynthgenTest, ConnectionTimeCarriesTheLargestLogitSpread) {
  EXPECT_LT(kTimeCoefficient, 0.0);
  SynthConfig config;
  config.n_rows = 20000;
  const SyntheticData data = GenerateDetailed(config);
  std::vector<double> time;
  std::vector<double> traffic;
  std::vector<double> passenger;
  std::vector<double> flight;
  std::vector<double> noise;
  for (const auto& t : data.terms) {
    time.push_back(t.time);
    traffic.push_back(t.traffic);
    passenger.push_back(t.passenger);
    flight.push_back(t.flight);
    noise.push_back(t.noise);
  }
  const double time_sd = StandardDeviation(time);
  EXPECT_GT(time_sd, StandardDeviation(traffic));
  EXPECT_GT(time_sd, StandardDeviation(passenger));
  EXPECT_GT(time_sd, StandardDeviation(flight));
  EXPECT_GT(time_sd, StandardDeviation(noise));
}

TEST(SynthgenTest, TrafficNetworkOrdering) {
  EXPECT_LT(kTrafficOffsetSS, kTrafficOffsetSN);
  EXPECT_LT(kTrafficOffsetSN, kTrafficOffsetNN);
  EXPECT_LT(kTrafficOffsetNN, kTrafficOffsetNS);
}

TEST(SynthgenTest, MissProbabilityFallsWithPerceivedTime) {
  SynthConfig config;
  config.n_rows = 50000;
  const SyntheticData data = GenerateDetailed(config);
  // Mean miss probability in short and long perceived-time bands.
  double short_sum = 0.0;
  double long_sum = 0.0;
  std::size_t short_n = 0;
  std::size_t long_n = 0;
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto perceived = ComputeConnectionTimes(data.records[i]).perceived;
    if (!perceived) continue;
    if (*perceived < 45) {
      short_sum += data.miss_probability[i];
      ++short_n;
    } else if (*perceived > 180) {
      long_sum += data.miss_probability[i];
      ++long_n;
    }
  }
  ASSERT_GT(short_n, 0u);
  ASSERT_GT(long_n, 0u);
  EXPECT_GT(short_sum / short_n, 10.0 * (long_sum / long_n));
}

}  // namespace
}  // namespace paxconnect::synth
