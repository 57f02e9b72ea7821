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


// Path-dependent TreeSHAP over a TreeEnsemble, an exhaustive Shapley oracle
// with the same cover-weighted valuation, and summary export.
//
// Attributions are in margin (log-odds) space:
//   base_value + sum_j phi_j == margin(x)

#ifndef PAXCONNECT_SHAP_H_
#define PAXCONNECT_SHAP_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "paxconnect/dataset.h"
#include "paxconnect/gbdt.h"

namespace paxconnect::shap {

struct ShapExplanation {
  double base_value = 0.0;
  std::vector<double> values;  // one per feature
  double margin = 0.0;         // model output for the row

  // |base_value + sum(values) - margin|
  double LocalAccuracyError() const;
};

// Cover-weighted expected output of one tree, before any scaling.
double ExpectedValue(const gbdt::Tree& tree);

// Adds `scale` times the TreeSHAP values of `tree` at `row` into `phi`.
void TreeShap(const gbdt::Tree& tree, std::span<const double> row, double scale,
              std::span<double> phi);

// v(S) = expected tree output when the features in S (bit mask) follow `row`
// and the others are averaged over children by cover.
double ConditionalExpectation(const gbdt::Tree& tree, std::span<const double> row,
                              std::uint32_t subset);

// Exhaustive Shapley values of one tree under ConditionalExpectation.
// Requires row.size() <= 16.
std::vector<double> BruteForceShap(const gbdt::Tree& tree,
                                   std::span<const double> row);

// Validates covers once and caches the base value.
class Explainer {
 public:
  // Throws StateError when the ensemble lacks node covers.
  explicit Explainer(const gbdt::TreeEnsemble& ensemble);

  double base_value() const { return base_value_; }
  // Throws ConfigError on a row width mismatch.
  ShapExplanation Explain(std::span<const double> row) const;

 private:
  const gbdt::TreeEnsemble& ensemble_;
  double base_value_ = 0.0;
};

ShapExplanation Explain(const gbdt::TreeEnsemble& ensemble,
                        std::span<const double> row);

struct FeatureImportance {
  std::string feature;
  double mean_abs_shap = 0.0;
  int rank = 0;  // 1 = most important
};

struct ShapSummary {
  std::vector<std::string> feature_names;
  std::vector<std::int64_t> row_ids;
  double base_value = 0.0;
  Matrix shap_values;     // rows x features
  Matrix feature_values;  // rows x features, model space
  std::vector<double> margins;
  // Sorted by rank; ties in importance keep column order.
  std::vector<FeatureImportance> importance;

  int RankOf(const std::string& feature) const;
  double MaxLocalAccuracyError() const;
  // Long format: feature,row_id,shap_value,feature_value,rank
  void WriteCsv(std::ostream& out) const;
  nlohmann::json ToJson() const;
};

// Explains every row of `rows`, in parallel.
ShapSummary Summarize(const gbdt::TreeEnsemble& ensemble, const Dataset& rows);

}  // namespace paxconnect::shap

#endif  // PAXCONNECT_SHAP_H_
