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


// Single-feature connection-time rule: a connection is predicted missed when
// its connection time is strictly below the threshold. Thresholds sweep
// 0..500 minutes in steps of 10.

#ifndef PAXCONNECT_BASELINE_H_
#define PAXCONNECT_BASELINE_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "json.hpp"
#include "paxconnect/dataset.h"
#include "paxconnect/domain.h"
#include "paxconnect/metrics.h"

namespace paxconnect::baseline {

inline constexpr double kMinimumConnectionTime = 60.0;

// 0, 10, ..., 500.
std::vector<double> SweepThresholds();

struct BaselineRow {
  double threshold = 0.0;
  metrics::ConfusionCounts counts;
  metrics::Rates rates;

  nlohmann::json ToJson() const;
};

struct BaselineReport {
  ConnectionTimeKind time_kind = ConnectionTimeKind::kScheduled;
  std::vector<BaselineRow> sweep;
  BaselineRow mct;  // fixed 60-minute rule
  // ROC over the sweep, anchored at (0, 0) and (1, 1); trapezoid AUC.
  metrics::Curve roc;
  // (recall, precision) over the sweep, step AUC.
  metrics::Curve pr;
  metrics::ThresholdChoice best_g_mean;
  metrics::ThresholdChoice best_f1;

  // Columns threshold,TP,FP,TN,FN,tpr,fpr,precision,recall,g_mean,f1.
  void WriteCsv(std::ostream& out) const;
  nlohmann::json ToJson() const;
};

BaselineRow EvaluateThreshold(std::span<const double> minutes,
                              std::span<const std::uint8_t> labels,
                              double threshold);

BaselineReport EvaluateBaseline(std::span<const double> minutes,
                                std::span<const std::uint8_t> labels,
                                ConnectionTimeKind kind);

// Uses the stage's connection-time column of `frame`. Throws SchemaError when
// the frame lacks it.
BaselineReport EvaluateBaseline(const RawFrame& frame, DsmStage stage);

}  // namespace paxconnect::baseline

#endif  // PAXCONNECT_BASELINE_H_
