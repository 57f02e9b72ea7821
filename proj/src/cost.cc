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

#include "paxconnect/cost.h"

#include <cmath>
#include <limits>

#include "paxconnect/errors.h"

namespace paxconnect::cost {

void CostParameters::Validate() const {
  if (!(std::isfinite(c_prev) && c_prev > 0.0)) {
    throw ConfigError("cost: c_prev must be a positive number");
  }
  if (!(std::isfinite(r) && r > 0.0)) {
    throw ConfigError("cost: r must be a positive number");
  }
}

double DeltaCost(const metrics::ConfusionCounts& c, const CostParameters& params) {
  params.Validate();
  const double tp = static_cast<double>(c.tp);
  const double fp = static_cast<double>(c.fp);
  if (c.tp == 0) return params.c_prev * fp;
  // The FN terms cancel; factoring out TP keeps the sign identical to
  // sign(r_min - r).
  return params.c_prev * tp * ((tp + fp) / tp - params.r);
}

double RMin(const metrics::ConfusionCounts& c) {
  if (c.tp == 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(c.tp + c.fp) / static_cast<double>(c.tp);
}

double RMinFromPrecision(double precision) {
  if (!(precision > 0.0)) return std::numeric_limits<double>::infinity();
  return 1.0 / precision;
}

nlohmann::json CostAnalysis::ToJson() const {
  nlohmann::json out = {{"applicable", applicable},
                        {"c_prev", params.c_prev},
                        {"r", params.r},
                        {"counts", counts.ToJson()}};
  if (!applicable) return out;
  out["delta_c"] = delta_c;
  out["r_min"] = r_min_finite ? nlohmann::json(r_min) : nlohmann::json(nullptr);
  out["r_min_finite"] = r_min_finite;
  out["prevention_count"] = prevention_count;
  out["reaction_count_with_model"] = reaction_count_with_model;
  out["reaction_count_without"] = reaction_count_without;
  return out;
}

CostAnalysis CostReport(const metrics::ConfusionCounts& counts,
                        const CostParameters& params, DsmStage stage) {
  params.Validate();
  CostAnalysis out;
  out.counts = counts;
  out.params = params;
  if (stage == DsmStage::kPostOperations) {
    out.applicable = false;
    return out;
  }
  out.delta_c = DeltaCost(counts, params);
  out.r_min = RMin(counts);
  out.r_min_finite = std::isfinite(out.r_min);
  out.prevention_count = counts.tp + counts.fp;
  out.reaction_count_with_model = counts.fn;
  out.reaction_count_without = counts.tp + counts.fn;
  return out;
}

}  // namespace paxconnect::cost
