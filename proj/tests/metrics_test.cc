#include "paxconnect/metrics.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "paxconnect/errors.h"

namespace paxconnect::metrics {
namespace {

// O(n^2) pairwise estimate of P(s+ > s-) + P(tie) / 2.
double Concordance(const std::vector<std::uint8_t>& labels,
                   const std::vector<double>& scores) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / pairs;
}

void RandomFixture(std::mt19937_64& rng, std::size_t n, std::vector<std::uint8_t>& labels,
                   std::vector<double>& scores) {
  labels.assign(n, 0);
  scores.assign(n, 0.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = u(rng) < 0.3;
    // Coarse rounding produces ties.
    scores[i] = std::round(20.0 * (u(rng) + 0.3 * labels[i])) / 20.0;
  }
  labels[0] = 1;
  labels[1] = 0;
}

TEST(ConfusionTest, AllCorrect) {
  const std::vector<std::uint8_t> labels = {1, 1, 1, 1, 0, 0, 0, 0, 0, 0};
  const ConfusionCounts c = Confusion(labels, labels);
  EXPECT_EQ(c, (ConfusionCounts{4, 0, 6, 0}));
}

TEST(ConfusionTest, AllPredictedPositive) {
  const std::vector<std::uint8_t> labels = {1, 0, 0, 1, 0};
  const std::vector<std::uint8_t> predictions(5, 1);
  const ConfusionCounts c = Confusion(labels, predictions);
  EXPECT_EQ(c.fp, 3);
  EXPECT_EQ(c.tp, 2);
  EXPECT_EQ(c.tn + c.fn, 0);
}

TEST(ConfusionTest, HandFixtureByEnumeration) {
  const std::vector<std::uint8_t> labels = {1, 0, 1, 1, 0, 0, 1, 0, 0, 1};
  const std::vector<double> scores = {0.9, 0.8, 0.3, 0.6, 0.1, 0.5, 0.5, 0.2, 0.7, 0.05};
  const ConfusionCounts c = ConfusionAt(labels, scores, 0.5);
  // >= 0.5: rows 0 1 3 5 6 8.
  EXPECT_EQ(c, (ConfusionCounts{3, 3, 2, 2}));
  EXPECT_EQ(c.total(), 10);
}

TEST(ConfusionTest, LengthMismatchThrows) {
  const std::vector<std::uint8_t> labels = {1, 0};
  const std::vector<double> scores = {0.5};
  EXPECT_THROW(ConfusionAt(labels, scores, 0.5), ConfigError);
}

TEST(RatesTest, HalfRecall) {
  const Rates r = ComputeRates({5, 0, 10, 5});
  EXPECT_DOUBLE_EQ(r.tpr, 0.5);
  EXPECT_DOUBLE_EQ(r.fpr, 0.0);
  EXPECT_NEAR(r.g_mean, 0.7071, 1e-4);
}

TEST(RatesTest, PerfectClassifier) {
  const Rates r = ComputeRates({7, 0, 9, 0});
  EXPECT_DOUBLE_EQ(r.g_mean, 1.0);
  EXPECT_DOUBLE_EQ(r.f1, 1.0);
}

TEST(RatesTest, PrecisionRecallF1) {
  const Rates r = ComputeRates({3, 1, 0, 1});
  EXPECT_DOUBLE_EQ(r.precision, 0.75);
  EXPECT_DOUBLE_EQ(r.recall, 0.75);
  EXPECT_DOUBLE_EQ(r.f1, 0.75);
}

TEST(RatesTest, UndefinedPrecisionIsFlagged) {
  const Rates r = ComputeRates({0, 0, 5, 5});
  EXPECT_FALSE(r.precision_defined);
  EXPECT_EQ(r.precision, 0.0);
  EXPECT_EQ(r.f1, 0.0);
}

TEST(RocTest, ScoresEqualLabels) {
  const std::vector<std::uint8_t> labels = {1, 0, 1, 0, 0};
  const std::vector<double> scores = {1, 0, 1, 0, 0};
  EXPECT_DOUBLE_EQ(RocCurve(labels, scores).auc, 1.0);
}

TEST(RocTest, ConstantScores) {
  const std::vector<std::uint8_t> labels = {1, 0, 1, 0, 0};
  const std::vector<double> scores(5, 0.3);
  EXPECT_DOUBLE_EQ(RocCurve(labels, scores).auc, 0.5);
}

TEST(RocTest, MatchesConcordanceOracle) {
  std::mt19937_64 rng(5);
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
  for (int fixture = 0; fixture < 20; ++fixture) {
    RandomFixture(rng, 200, labels, scores);
    EXPECT_NEAR(RocCurve(labels, scores).auc, Concordance(labels, scores), 1e-12);
  }
}

TEST(RocTest, CurveStartsAndEndsAtCorners) {
  const std::vector<std::uint8_t> labels = {1, 0, 1, 0};
  const std::vector<double> scores = {0.2, 0.4, 0.6, 0.8};
  const Curve roc = RocCurve(labels, scores);
  EXPECT_EQ(roc.points.front().x, 0.0);
  EXPECT_EQ(roc.points.front().y, 0.0);
  EXPECT_EQ(roc.points.back().x, 1.0);
  EXPECT_EQ(roc.points.back().y, 1.0);
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    EXPECT_GE(roc.points[i].x, roc.points[i - 1].x);
    EXPECT_GE(roc.points[i].y, roc.points[i - 1].y);
  }
}

TEST(RocTest, SingleClassThrows) {
  const std::vector<std::uint8_t> labels = {1, 1};
  const std::vector<double> scores = {0.1, 0.2};
  EXPECT_THROW(RocCurve(labels, scores), DataError);
}

TEST(RocTest, NanScoreThrows) {
  const std::vector<std::uint8_t> labels = {1, 0};
  const std::vector<double> scores = {0.1, std::nan("")};
  EXPECT_THROW(RocCurve(labels, scores), DataError);
}

TEST(RocTest, InvariantUnderMonotoneTransform) {
  std::mt19937_64 rng(8);
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
  RandomFixture(rng, 300, labels, scores);
  std::vector<double> transformed;
  for (const double s : scores) transformed.push_back(std::exp(3.0 * s) - 7.0);
  const Curve a = RocCurve(labels, scores);
  const Curve b = RocCurve(labels, transformed);
  EXPECT_EQ(a.auc, b.auc);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    EXPECT_EQ(a.points[i].x, b.points[i].x);
    EXPECT_EQ(a.points[i].y, b.points[i].y);
  }
}

TEST(PrTest, PerfectScores) {
  const std::vector<std::uint8_t> labels = {1, 0, 1, 0, 0};
  const std::vector<double> scores = {0.9, 0.1, 0.8, 0.2, 0.3};
  EXPECT_DOUBLE_EQ(PrCurve(labels, scores).auc, 1.0);
}

TEST(PrTest, ConstantScoresGivePrevalence) {
  const std::vector<std::uint8_t> labels = {1, 0, 0, 0, 1, 0, 0, 0, 0, 0};
  const std::vector<double> scores(10, 0.5);
  EXPECT_DOUBLE_EQ(PrCurve(labels, scores).auc, 0.2);
}

TEST(PrTest, MatchesPerThresholdRecomputation) {
  std::mt19937_64 rng(13);
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
  for (int fixture = 0; fixture < 10; ++fixture) {
    RandomFixture(rng, 150, labels, scores);
    const Curve pr = PrCurve(labels, scores);
    double area = 0.0;
    double previous_recall = 0.0;
    for (std::size_t i = 1; i < pr.points.size(); ++i) {
      const Rates r = ComputeRates(ConfusionAt(labels, scores, pr.points[i].threshold));
      EXPECT_DOUBLE_EQ(pr.points[i].x, r.recall);
      EXPECT_DOUBLE_EQ(pr.points[i].y, r.precision);
      area += (r.recall - previous_recall) * r.precision;
      previous_recall = r.recall;
    }
    EXPECT_NEAR(pr.auc, area, 1e-12);
  }
}

TEST(PrTest, NoPositivesThrows) {
  const std::vector<std::uint8_t> labels = {0, 0};
  const std::vector<double> scores = {0.1, 0.2};
  EXPECT_THROW(PrCurve(labels, scores), DataError);
}

TEST(CurveTest, CsvHasHeaderAndOneLinePerPoint) {
  const std::vector<std::uint8_t> labels = {1, 0, 1};
  const std::vector<double> scores = {0.9, 0.1, 0.4};
  const Curve roc = RocCurve(labels, scores);
  std::ostringstream out;
  roc.WriteCsv(out);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("x,y,threshold\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')),
            roc.points.size() + 1);
  EXPECT_NE(text.find("inf"), std::string::npos);
}

TEST(BestThresholdTest, SeparableData) {
  const std::vector<std::uint8_t> labels = {0, 0, 0, 1, 1};
  const std::vector<double> scores = {0.1, 0.2, 0.3, 0.7, 0.8};
  const ThresholdChoice g = BestThreshold(labels, scores, Objective::kGMean);
  EXPECT_DOUBLE_EQ(g.value, 1.0);
  EXPECT_GT(g.threshold, 0.3);
  EXPECT_LE(g.threshold, 0.7);
  EXPECT_DOUBLE_EQ(BestThreshold(labels, scores, Objective::kF1).value, 1.0);
}

TEST(BestThresholdTest, MatchesExhaustiveSweep) {
  std::mt19937_64 rng(21);
  std::vector<std::uint8_t> labels;
  std::vector<double> scores;
  for (int fixture = 0; fixture < 10; ++fixture) {
    RandomFixture(rng, 120, labels, scores);
    for (const Objective objective : {Objective::kGMean, Objective::kF1}) {
      double best_value = -1.0;
      double best_threshold = 0.0;
      std::vector<double> candidates = scores;
      std::sort(candidates.begin(), candidates.end());
      for (const double t : candidates) {
        const double v = ObjectiveValue(ComputeRates(ConfusionAt(labels, scores, t)),
                                        objective);
        if (v > best_value) {
          best_value = v;
          best_threshold = t;
        }
      }
      const ThresholdChoice choice = BestThreshold(labels, scores, objective);
      EXPECT_DOUBLE_EQ(choice.value, best_value);
      EXPECT_EQ(choice.threshold, best_threshold);
      EXPECT_EQ(choice.counts, ConfusionAt(labels, scores, choice.threshold));
    }
  }
}

TEST(BestThresholdTest, TieGoesToSmallerThreshold) {
  const std::vector<std::uint8_t> labels = {1, 0, 1, 0};
  const std::vector<double> scores = {0.8, 0.6, 0.4, 0.2};
  // t=0.8: tpr .5 fpr 0; t=0.4: tpr 1 fpr .5. Both g_mean sqrt(.5).
  const ThresholdChoice g = BestThreshold(labels, scores, Objective::kGMean);
  EXPECT_NEAR(g.value, std::sqrt(0.5), 1e-15);
  EXPECT_EQ(g.threshold, 0.4);
}

TEST(BestThresholdTest, SingleDistinctScore) {
  const std::vector<std::uint8_t> labels = {1, 0, 0};
  const std::vector<double> scores(3, 0.42);
  EXPECT_EQ(BestThreshold(labels, scores, Objective::kGMean).threshold, 0.42);
}

TEST(BestThresholdTest, EmptyThrows) {
  EXPECT_THROW(BestThreshold({}, {}, Objective::kF1), DataError);
}

}  // namespace
}  // namespace paxconnect::metrics
