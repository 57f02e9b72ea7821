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

#include "paxconnect/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include "paxconnect/errors.h"

namespace paxconnect::metrics {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void CheckSizes(std::size_t labels, std::size_t other) {
  if (labels != other) throw ConfigError("labels and scores differ in length");
}

// Cumulative counts after each distinct score, in descending score order.
struct Step {
  double threshold;
  std::int64_t tp;
  std::int64_t fp;
};

std::vector<Step> DescendingSteps(std::span<const std::uint8_t> labels,
                                  std::span<const double> scores) {
  CheckSizes(labels.size(), scores.size());
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<Step> steps;
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t r = order[i];
    if (std::isnan(scores[r])) throw DataError("scores contain NaN");
    (labels[r] ? tp : fp) += 1;
    if (i + 1 == order.size() || scores[order[i + 1]] != scores[r]) {
      steps.push_back({scores[r], tp, fp});
    }
  }
  return steps;
}

}  // namespace

nlohmann::json ConfusionCounts::ToJson() const {
  return {{"tp", tp}, {"fp", fp}, {"tn", tn}, {"fn", fn}};
}

ConfusionCounts ConfusionCounts::FromJson(const nlohmann::json& in) {
  return {in.at("tp").get<std::int64_t>(), in.at("fp").get<std::int64_t>(),
          in.at("tn").get<std::int64_t>(), in.at("fn").get<std::int64_t>()};
}

ConfusionCounts Confusion(std::span<const std::uint8_t> labels,
                          std::span<const std::uint8_t> predictions) {
  CheckSizes(labels.size(), predictions.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      (predictions[i] ? c.tp : c.fn) += 1;
    } else {
      (predictions[i] ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

ConfusionCounts ConfusionAt(std::span<const std::uint8_t> labels,
                            std::span<const double> scores, double threshold) {
  CheckSizes(labels.size(), scores.size());
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i]) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return c;
}

nlohmann::json Rates::ToJson() const {
  return {{"tpr", tpr},         {"fpr", fpr}, {"precision", precision},
          {"recall", recall},   {"g_mean", g_mean}, {"f1", f1},
          {"precision_defined", precision_defined}};
}

Rates ComputeRates(const ConfusionCounts& c) {
  Rates r;
  const auto ratio = [](std::int64_t num, std::int64_t den) {
    return den > 0 ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
  };
  r.tpr = ratio(c.tp, c.tp + c.fn);
  r.fpr = ratio(c.fp, c.fp + c.tn);
  r.recall = r.tpr;
  r.precision_defined = c.tp + c.fp > 0;
  r.precision = ratio(c.tp, c.tp + c.fp);
  r.g_mean = std::sqrt(r.tpr * (1.0 - r.fpr));
  r.f1 = r.precision + r.recall > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

void Curve::WriteCsv(std::ostream& out) const {
  out.precision(17);
  out << "x,y,threshold\n";
  for (const auto& p : points) {
    out << p.x << ',' << p.y << ',';
    if (std::isinf(p.threshold)) {
      out << (p.threshold > 0 ? "inf" : "-inf");
    } else {
      out << p.threshold;
    }
    out << '\n';
  }
}

double TrapezoidArea(std::span<const CurvePoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].x - points[i - 1].x) * (points[i].y + points[i - 1].y) / 2.0;
  }
  return area;
}

double StepArea(std::span<const CurvePoint> points) {
  double area = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    area += (points[i].x - points[i - 1].x) * points[i].y;
  }
  return area;
}

Curve RocCurve(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  const auto steps = DescendingSteps(labels, scores);
  const std::int64_t pos = steps.empty() ? 0 : steps.back().tp;
  const std::int64_t neg = steps.empty() ? 0 : steps.back().fp;
  if (pos == 0 || neg == 0) throw DataError("ROC curve needs both classes");
  Curve curve;
  curve.kind = CurveKind::kRoc;
  curve.points.push_back({0.0, 0.0, kInf});
  for (const auto& s : steps) {
    curve.points.push_back({static_cast<double>(s.fp) / static_cast<double>(neg),
                            static_cast<double>(s.tp) / static_cast<double>(pos),
                            s.threshold});
  }
  curve.auc = TrapezoidArea(curve.points);
  return curve;
}

Curve PrCurve(std::span<const std::uint8_t> labels, std::span<const double> scores) {
  const auto steps = DescendingSteps(labels, scores);
  const std::int64_t pos = steps.empty() ? 0 : steps.back().tp;
  if (pos == 0) throw DataError("PR curve needs at least one positive");
  Curve curve;
  curve.kind = CurveKind::kPr;
  curve.points.push_back({0.0, 1.0, kInf});
  for (const auto& s : steps) {
    curve.points.push_back(
        {static_cast<double>(s.tp) / static_cast<double>(pos),
         static_cast<double>(s.tp) / static_cast<double>(s.tp + s.fp), s.threshold});
  }
  curve.auc = StepArea(curve.points);
  return curve;
}

std::string_view ObjectiveName(Objective objective) {
  return objective == Objective::kGMean ? "g_mean" : "f1";
}

double ObjectiveValue(const Rates& rates, Objective objective) {
  return objective == Objective::kGMean ? rates.g_mean : rates.f1;
}

nlohmann::json ThresholdChoice::ToJson() const {
  return {{"threshold", threshold}, {"value", value}, {"counts", counts.ToJson()}};
}

ThresholdChoice BestThreshold(std::span<const std::uint8_t> labels,
                              std::span<const double> scores, Objective objective) {
  const auto steps = DescendingSteps(labels, scores);
  if (steps.empty()) throw DataError("no scores to choose a threshold from");
  const std::int64_t pos = steps.back().tp;
  const std::int64_t neg = steps.back().fp;
  ThresholdChoice best;
  best.value = -1.0;
  // Descending thresholds: >= lets a later (smaller) threshold win a tie.
  for (const auto& s : steps) {
    const ConfusionCounts c{s.tp, s.fp, neg - s.fp, pos - s.tp};
    const double value = ObjectiveValue(ComputeRates(c), objective);
    if (value >= best.value) best = {s.threshold, value, c};
  }
  return best;
}

}  // namespace paxconnect::metrics
