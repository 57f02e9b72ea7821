#include "paxconnect/preprocess.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "paxconnect/errors.h"

namespace paxconnect::preprocess {
namespace {

std::vector<std::uint8_t> Labels(std::size_t n, std::size_t positives) {
  std::vector<std::uint8_t> labels(n, 0);
  for (std::size_t i = 0; i < positives; ++i) labels[(i * 7919) % n] = 1;
  return labels;
}

RawColumn Categorical(std::string name, std::vector<std::string> tokens) {
  return {{std::move(name), FeatureKind::kCategorical}, {}, std::move(tokens)};
}

RawColumn Numeric(std::string name, std::vector<double> numbers) {
  return {{std::move(name), FeatureKind::kNumeric}, std::move(numbers), {}};
}

RawFrame Frame(std::vector<RawColumn> columns, std::vector<std::uint8_t> labels) {
  RawFrame frame;
  frame.columns = std::move(columns);
  frame.labels = std::move(labels);
  frame.row_ids.resize(frame.labels.size());
  std::iota(frame.row_ids.begin(), frame.row_ids.end(), 0);
  return frame;
}

std::size_t CountPositives(const std::vector<std::size_t>& rows,
                           const std::vector<std::uint8_t>& labels) {
  std::size_t n = 0;
  for (const auto r : rows) n += labels[r];
  return n;
}

TEST(StratifiedSplitTest, ThousandRowsSixtyPositive) {
  const auto labels = Labels(1000, 60);
  ASSERT_EQ(std::accumulate(labels.begin(), labels.end(), 0), 60);
  const SplitIndices split = StratifiedSplit(labels, 0.10, 7);
  EXPECT_NEAR(static_cast<double>(split.test.size()), 100.0, 1.0);
  EXPECT_NEAR(static_cast<double>(CountPositives(split.test, labels)), 6.0, 1.0);
}

TEST(StratifiedSplitTest, TenRowsOnePositive) {
  const auto labels = Labels(10, 1);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SplitIndices split = StratifiedSplit(labels, 0.10, seed);
    ASSERT_EQ(split.test.size(), 1u);
    EXPECT_EQ(CountPositives(split.test, labels), 0u);
    EXPECT_EQ(CountPositives(split.train, labels), 1u);
  }
}

TEST(StratifiedSplitTest, SameSeedSamePartition) {
  const auto labels = Labels(5000, 300);
  const SplitIndices a = StratifiedSplit(labels, 0.10, 11);
  const SplitIndices b = StratifiedSplit(labels, 0.10, 11);
  const SplitIndices c = StratifiedSplit(labels, 0.10, 12);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.test, c.test);
}

TEST(StratifiedSplitTest, IsAPartition) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 20 + rng() % 2000;
    std::vector<std::uint8_t> labels(n);
    for (auto& l : labels) l = (rng() % 10) == 0;
    labels[0] = 1;
    labels[1] = 0;
    const double fraction = 0.05 + 0.5 * static_cast<double>(rng() % 100) / 100.0;
    const SplitIndices split = StratifiedSplit(labels, fraction, rng());
    EXPECT_EQ(split.train.size() + split.test.size(), n);
    std::set<std::size_t> all(split.train.begin(), split.train.end());
    for (const auto r : split.test) EXPECT_TRUE(all.insert(r).second);
    EXPECT_EQ(all.size(), n);
    EXPECT_TRUE(std::is_sorted(split.test.begin(), split.test.end()));
    const double positives = std::accumulate(labels.begin(), labels.end(), 0.0);
    EXPECT_LE(std::abs(static_cast<double>(CountPositives(split.test, labels)) -
                       positives * fraction),
              1.0);
  }
}

TEST(StratifiedSplitTest, SingleClassIsAnError) {
  const std::vector<std::uint8_t> labels(50, 0);
  EXPECT_THROW(StratifiedSplit(labels, 0.10, 1), DataError);
}

TEST(TargetEncoderTest, BlendClosedForm) {
  EXPECT_NEAR(TargetEncoder::Blend(1.0, 20.0, 0.06, 20.0), 0.53, 1e-15);
  EXPECT_DOUBLE_EQ(TargetEncoder::Blend(0.7, 0.0, 0.06, 20.0), 0.06);
  // n_c = 10^6, mean 0: the encoding is p * m / (n + m) < 1 / (1 + n / m).
  const double n = 1e6;
  const double value = TargetEncoder::Blend(0.0, n, 0.06, 20.0);
  EXPECT_NEAR(value, 0.06 * 20.0 / (n + 20.0), 1e-15);
  EXPECT_LT(value, 1.0 / (1.0 + n / 20.0));
}

TEST(TargetEncoderTest, FittedLevelsAndUnseenFallback) {
  // 20 rows of "A", all positive, and 20 rows of "B" with 1 positive:
  // prior = 21/40.
  std::vector<std::string> tokens(40, "A");
  std::vector<std::uint8_t> labels(40, 1);
  for (int i = 20; i < 40; ++i) {
    tokens[i] = "B";
    labels[i] = i == 20;
  }
  TargetEncoder encoder(20.0);
  encoder.Fit(Frame({Categorical("c", tokens)}, labels));
  const double prior = 21.0 / 40.0;
  EXPECT_DOUBLE_EQ(encoder.prior(), prior);
  EXPECT_NEAR(encoder.Encode("c", "A"), 0.5 * (1.0 + prior), 1e-15);
  EXPECT_NEAR(encoder.Encode("c", "B"), 0.5 * (1.0 / 20.0 + prior), 1e-15);
  EXPECT_DOUBLE_EQ(encoder.Encode("c", "never-seen"), prior);
  EXPECT_EQ(encoder.levels("c").at("A").count, 20u);
}

TEST(TargetEncoderTest, EncodedValuesStayInUnitInterval) {
  std::mt19937_64 rng(5);
  std::vector<std::string> tokens;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 3000; ++i) {
    tokens.push_back("k" + std::to_string(rng() % 50));
    labels.push_back(rng() % 3 == 0);
  }
  TargetEncoder encoder;
  encoder.Fit(Frame({Categorical("c", tokens)}, labels));
  for (const auto& [category, level] : encoder.levels("c")) {
    EXPECT_GE(level.value, 0.0);
    EXPECT_LE(level.value, 1.0);
  }
}

TEST(TargetEncoderTest, MonotoneInMeanAndCount) {
  const double prior = 0.2;
  for (double n : {1.0, 5.0, 50.0}) {
    double previous = -1.0;
    for (double mean = 0.0; mean <= 1.0; mean += 0.1) {
      const double value = TargetEncoder::Blend(mean, n, prior, 20.0);
      EXPECT_GT(value, previous);
      previous = value;
    }
  }
  // Moves from the prior toward the level mean as the count grows.
  double previous = TargetEncoder::Blend(0.9, 0.0, prior, 20.0);
  for (double n = 1.0; n < 1e5; n *= 3.0) {
    const double value = TargetEncoder::Blend(0.9, n, prior, 20.0);
    EXPECT_GT(value, previous);
    EXPECT_LT(value, 0.9);
    previous = value;
  }
}

TEST(TargetEncoderTest, UseBeforeFitIsAStateError) {
  TargetEncoder encoder;
  EXPECT_THROW(encoder.Encode("c", "A"), StateError);
  Preprocessor preprocessor;
  EXPECT_THROW(preprocessor.Transform(Frame({Numeric("x", {1.0})}, {0})),
               StateError);
}

TEST(TargetEncoderTest, RejectsNonPositiveSmoothing) {
  EXPECT_THROW(TargetEncoder(0.0), ConfigError);
}

TEST(StandardizerTest, TwoPointColumn) {
  Standardizer standardizer;
  standardizer.Fit(Frame({Numeric("x", {0.0, 2.0})}, {0, 1}));
  EXPECT_DOUBLE_EQ(standardizer.stats("x").mean, 1.0);
  EXPECT_DOUBLE_EQ(standardizer.stats("x").sd, 1.0);
  EXPECT_DOUBLE_EQ(standardizer.Transform("x", 0.0), -1.0);
  EXPECT_DOUBLE_EQ(standardizer.Transform("x", 2.0), 1.0);
  EXPECT_DOUBLE_EQ(standardizer.Transform("x", 1.0), 0.0);
}

TEST(StandardizerTest, ConstantColumnIsFlagged) {
  Standardizer standardizer;
  standardizer.Fit(Frame({Numeric("x", {5.0, 5.0, 5.0})}, {0, 1, 0}));
  EXPECT_TRUE(standardizer.stats("x").constant);
  EXPECT_EQ(standardizer.Transform("x", 5.0), 0.0);
  EXPECT_EQ(standardizer.Transform("x", 9.0), 0.0);
}

TEST(StandardizerTest, TransformedTrainingColumnHasUnitMoments) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> normal(130.0, 45.0);
  std::vector<double> x(5000);
  for (auto& v : x) v = normal(rng);
  const RawFrame frame = Frame({Numeric("x", x)}, std::vector<std::uint8_t>(x.size()));
  Preprocessor preprocessor;
  preprocessor.Fit(frame);
  const Dataset out = preprocessor.Transform(frame);
  const auto& z = out.values[0];
  const double n = static_cast<double>(z.size());
  const double mean = std::accumulate(z.begin(), z.end(), 0.0) / n;
  double var = 0.0;
  for (const double v : z) var += (v - mean) * (v - mean);
  EXPECT_NEAR(mean, 0.0, 1e-9);
  EXPECT_NEAR(std::sqrt(var / n), 1.0, 1e-9);
}

TEST(PreprocessorTest, CategoricalColumnsAreNotStandardized) {
  const RawFrame frame = Frame(
      {Categorical("net", {"SS", "NS", "NS", "SN"}), Numeric("t", {30, 60, 90, 120})},
      {0, 1, 1, 0});
  Preprocessor preprocessor(1.0);
  preprocessor.Fit(frame);
  const Dataset out = preprocessor.Transform(frame);
  EXPECT_EQ(out.columns[0].kind, FeatureKind::kCategorical);
  EXPECT_DOUBLE_EQ(out.values[0][1], preprocessor.encoder().Encode("net", "NS"));
  EXPECT_DOUBLE_EQ(out.values[0][1], (2.0 / 3.0) * 1.0 + (1.0 / 3.0) * 0.5);
  EXPECT_EQ(out.row_ids, frame.row_ids);

  const std::vector<RawValue> raw = {std::string("XX"), 75.0};
  const auto row = preprocessor.TransformRow(raw);
  EXPECT_DOUBLE_EQ(row[0], 0.5);
  EXPECT_DOUBLE_EQ(row[1], 0.0);
}

TEST(PreprocessorTest, ColumnMismatchIsASchemaError) {
  Preprocessor preprocessor;
  preprocessor.Fit(Frame({Numeric("a", {1, 2})}, {0, 1}));
  EXPECT_THROW(preprocessor.Transform(Frame({Numeric("b", {1, 2})}, {0, 1})),
               SchemaError);
  const std::vector<RawValue> wrong_type = {std::string("x")};
  EXPECT_THROW(preprocessor.TransformRow(wrong_type), SchemaError);
}

TEST(PreprocessorTest, JsonRoundTrip) {
  const RawFrame frame = Frame(
      {Categorical("net", {"SS", "NS", "NS", "SN", "NN"}),
       Numeric("t", {30, 60, 90, 120, 40}), Numeric("k", {1, 1, 1, 1, 1})},
      {0, 1, 1, 0, 1});
  Preprocessor preprocessor;
  preprocessor.Fit(frame);
  const Preprocessor copy = Preprocessor::FromJson(preprocessor.ToJson());
  EXPECT_EQ(copy.ToJson(), preprocessor.ToJson());
  const Dataset a = preprocessor.Transform(frame);
  const Dataset b = copy.Transform(frame);
  EXPECT_EQ(a.values, b.values);
  EXPECT_THROW(Preprocessor::FromJson(nlohmann::json{{"columns", 3}}), ParseError);
}

TEST(LeakageTest, StatisticsComeFromTrainingRowsOnly) {
  std::vector<double> x;
  std::vector<std::string> c;
  std::vector<std::uint8_t> labels;
  for (int i = 0; i < 200; ++i) {
    x.push_back(i % 17);
    c.push_back(i % 2 ? "A" : "B");
    labels.push_back(i % 5 == 0);
  }
  const RawFrame all = Frame({Categorical("c", c), Numeric("x", x)}, labels);
  const SplitIndices split = StratifiedSplit(all.labels, 0.25, 3);
  RawFrame train = all.Select(split.train);
  RawFrame test = all.Select(split.test);

  Preprocessor fitted;
  fitted.Fit(train);
  // Shift the test rows: changes the pooled statistics but not the fitted ones.
  for (auto& v : test.columns[1].numbers) v += 1000.0;
  for (auto& l : test.labels) l = 1;
  Preprocessor refit;
  refit.Fit(train);
  EXPECT_EQ(fitted.ToJson(), refit.ToJson());

  RawFrame pooled = train;
  for (std::size_t col = 0; col < pooled.columns.size(); ++col) {
    auto& dst = pooled.columns[col];
    const auto& src = test.columns[col];
    dst.numbers.insert(dst.numbers.end(), src.numbers.begin(), src.numbers.end());
    dst.tokens.insert(dst.tokens.end(), src.tokens.begin(), src.tokens.end());
  }
  pooled.labels.insert(pooled.labels.end(), test.labels.begin(), test.labels.end());
  Preprocessor leaky;
  leaky.Fit(pooled);
  EXPECT_NE(leaky.standardizer().stats("x").mean, fitted.standardizer().stats("x").mean);
  EXPECT_NE(leaky.encoder().Encode("c", "A"), fitted.encoder().Encode("c", "A"));
}

}  // namespace
}  // namespace paxconnect::preprocess
