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


// Operational cost of acting on model predictions.
//
//   C_REAC = r * C_PREV
//   dC = [C_REAC * FN + C_PREV * (TP + FP)] - C_REAC * (TP + FN)
//   dC < 0  <=>  r > r_min = (TP + FP) / TP = 1 / precision

#ifndef PAXCONNECT_COST_H_
#define PAXCONNECT_COST_H_

#include "json.hpp"
#include "paxconnect/domain.h"
#include "paxconnect/metrics.h"

namespace paxconnect::cost {

struct CostParameters {
  double c_prev = 1.0;
  double r = 1.0;

  double c_reac() const { return r * c_prev; }
  // Throws ConfigError unless both are finite and positive.
  void Validate() const;
};

double DeltaCost(const metrics::ConfusionCounts& counts, const CostParameters& params);

// +inf when TP == 0.
double RMin(const metrics::ConfusionCounts& counts);
double RMinFromPrecision(double precision);

struct CostAnalysis {
  bool applicable = true;
  metrics::ConfusionCounts counts;
  CostParameters params;
  double delta_c = 0.0;
  double r_min = 0.0;
  bool r_min_finite = true;
  std::int64_t prevention_count = 0;
  std::int64_t reaction_count_with_model = 0;
  std::int64_t reaction_count_without = 0;

  nlohmann::json ToJson() const;
};

// Post-operations runs are marked not applicable: no prevention is possible
// after the fact.
CostAnalysis CostReport(const metrics::ConfusionCounts& counts,
                        const CostParameters& params,
                        DsmStage stage = DsmStage::kTactical);

}  // namespace paxconnect::cost

#endif  // PAXCONNECT_COST_H_
