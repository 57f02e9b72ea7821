/*
 * Copyright 2026 The Paxconnect Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


// Imbalanced binary classification metrics. Scores predict the positive
// class when score >= threshold.

#ifndef PAXCONNECT_METRICS_H_
#define PAXCONNECT_METRICS_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace paxconnect::metrics {

struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  nlohmann::json ToJson() const;
  static ConfusionCounts FromJson(const nlohmann::json& json);
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts Confusion(std::span<const std::uint8_t> labels,
                          std::span<const std::uint8_t> predictions);
ConfusionCounts ConfusionAt(std::span<const std::uint8_t> labels,
                            std::span<const double> scores, double threshold);

struct Rates {
  double tpr = 0.0;
  double fpr = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double g_mean = 0.0;
  double f1 = 0.0;
  // False when TP + FP == 0; precision is then reported as 0.
  bool precision_defined = true;

  nlohmann::json ToJson() const;
};

// Rates with no positives (or no negatives) report tpr (or fpr) as 0.
Rates ComputeRates(const ConfusionCounts& counts);

enum class CurveKind { kRoc, kPr };

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  double threshold = 0.0;  // +inf for the anchor point
};

struct Curve {
  CurveKind kind = CurveKind::kRoc;
  std::vector<CurvePoint> points;
  double auc = 0.0;

  // Columns x,y,threshold.
  void WriteCsv(std::ostream& out) const;
};

// One point per distinct score, plus the (0, 0) anchor; trapezoid AUC.
// Throws DataError unless both classes are present.
Curve RocCurve(std::span<const std::uint8_t> labels, std::span<const double> scores);

// (recall, precision) per distinct score, plus the (0, 1) anchor. AUC by step
// interpolation: sum over points of (recall_i - recall_{i-1}) * precision_i.
Curve PrCurve(std::span<const std::uint8_t> labels, std::span<const double> scores);

// Step-interpolated area for (recall, precision) points sorted by recall.
double StepArea(std::span<const CurvePoint> points);
// Trapezoid area for points sorted by x.
double TrapezoidArea(std::span<const CurvePoint> points);

enum class Objective { kGMean, kF1 };
std::string_view ObjectiveName(Objective objective);
double ObjectiveValue(const Rates& rates, Objective objective);

struct ThresholdChoice {
  double threshold = 0.0;
  double value = 0.0;
  ConfusionCounts counts;

  nlohmann::json ToJson() const;
};

// Best threshold among the distinct scores; ties go to the smaller threshold.
ThresholdChoice BestThreshold(std::span<const std::uint8_t> labels,
                              std::span<const double> scores, Objective objective);

}  // namespace paxconnect::metrics

#endif  // PAXCONNECT_METRICS_H_
