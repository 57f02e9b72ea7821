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

#include "paxconnect/baseline.h"

#include <algorithm>
#include <limits>
#include <ostream>
#include <string>

#include "paxconnect/errors.h"

namespace paxconnect::baseline {
namespace {

using metrics::ConfusionCounts;
using metrics::CurvePoint;
using metrics::Objective;

metrics::ThresholdChoice Best(const std::vector<BaselineRow>& sweep,
                              Objective objective) {
  metrics::ThresholdChoice best;
  best.value = -1.0;
  for (const auto& row : sweep) {
    const double value = metrics::ObjectiveValue(row.rates, objective);
    // Ascending thresholds: strict > keeps the smaller one on ties.
    if (value > best.value) best = {row.threshold, value, row.counts};
  }
  return best;
}

}  // namespace

std::vector<double> SweepThresholds() {
  std::vector<double> out;
  for (int t = 0; t <= 500; t += 10) out.push_back(t);
  return out;
}

nlohmann::json BaselineRow::ToJson() const {
  nlohmann::json out = {{"threshold", threshold}, {"counts", counts.ToJson()}};
  out.update(rates.ToJson());
  return out;
}

BaselineRow EvaluateThreshold(std::span<const double> minutes,
                              std::span<const std::uint8_t> labels,
                              double threshold) {
  if (minutes.size() != labels.size()) {
    throw ConfigError("minutes and labels differ in length");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < minutes.size(); ++i) {
    const bool predicted = minutes[i] < threshold;
    if (labels[i]) {
      (predicted ? c.tp : c.fn) += 1;
    } else {
      (predicted ? c.fp : c.tn) += 1;
    }
  }
  return {threshold, c, metrics::ComputeRates(c)};
}

BaselineReport EvaluateBaseline(std::span<const double> minutes,
                                std::span<const std::uint8_t> labels,
                                ConnectionTimeKind kind) {
  BaselineReport report;
  report.time_kind = kind;
  for (const double t : SweepThresholds()) {
    report.sweep.push_back(EvaluateThreshold(minutes, labels, t));
  }
  report.mct = EvaluateThreshold(minutes, labels, kMinimumConnectionTime);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  report.roc.kind = metrics::CurveKind::kRoc;
  report.roc.points.push_back({0.0, 0.0, -kInf});
  for (const auto& row : report.sweep) {
    report.roc.points.push_back({row.rates.fpr, row.rates.tpr, row.threshold});
  }
  report.roc.points.push_back({1.0, 1.0, kInf});
  report.roc.auc = metrics::TrapezoidArea(report.roc.points);

  report.pr.kind = metrics::CurveKind::kPr;
  report.pr.points.push_back({0.0, 1.0, -kInf});
  for (const auto& row : report.sweep) {
    if (!row.rates.precision_defined) continue;
    report.pr.points.push_back({row.rates.recall, row.rates.precision, row.threshold});
  }
  report.pr.auc = metrics::StepArea(report.pr.points);

  report.best_g_mean = Best(report.sweep, Objective::kGMean);
  report.best_f1 = Best(report.sweep, Objective::kF1);
  return report;
}

BaselineReport EvaluateBaseline(const RawFrame& frame, DsmStage stage) {
  const std::string name(FeatureName(ConnectionTimeFeature(stage)));
  for (const auto& column : frame.columns) {
    if (column.spec.name == name) {
      return EvaluateBaseline(column.numbers, frame.labels,
                              ConnectionTimeKindOf(stage));
    }
  }
  throw SchemaError("baseline: column '" + name + "' is not present for stage " +
                    std::string(StageName(stage)));
}

void BaselineReport::WriteCsv(std::ostream& out) const {
  out.precision(17);
  out << "threshold,TP,FP,TN,FN,tpr,fpr,precision,recall,g_mean,f1\n";
  for (const auto& row : sweep) {
    out << row.threshold << ',' << row.counts.tp << ',' << row.counts.fp << ','
        << row.counts.tn << ',' << row.counts.fn << ',' << row.rates.tpr << ','
        << row.rates.fpr << ',' << row.rates.precision << ',' << row.rates.recall
        << ',' << row.rates.g_mean << ',' << row.rates.f1 << '\n';
  }
}

nlohmann::json BaselineReport::ToJson() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : sweep) rows.push_back(row.ToJson());
  return {{"time_feature", ConnectionTimeKindName(time_kind)},
          {"auc_roc", roc.auc},
          {"auc_pr", pr.auc},
          {"mct", mct.ToJson()},
          {"best_g_mean", best_g_mean.ToJson()},
          {"best_f1", best_f1.ToJson()},
          {"sweep", std::move(rows)}};
}

}  // namespace paxconnect::baseline
