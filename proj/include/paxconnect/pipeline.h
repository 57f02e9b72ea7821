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


// End-to-end run of one decision-support stage and the on-disk model bundle.
//
// Steps: stage features, listwise deletion, stratified split, preprocessing
// fitted on the training rows, GMM oversampling of the minority class in
// preprocessed space, boosting, test scoring, threshold baseline on the same
// test rows, metrics, SHAP summary, cost analysis.

#ifndef PAXCONNECT_PIPELINE_H_
#define PAXCONNECT_PIPELINE_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "paxconnect/baseline.h"
#include "paxconnect/cost.h"
#include "paxconnect/dataset.h"
#include "paxconnect/domain.h"
#include "paxconnect/gbdt.h"
#include "paxconnect/gmm.h"
#include "paxconnect/metrics.h"
#include "paxconnect/preprocess.h"
#include "paxconnect/shap.h"
#include "paxconnect/synthgen.h"

namespace paxconnect::pipeline {

inline constexpr int kReportVersion = 1;

struct RunConfig {
  DsmStage stage = DsmStage::kStrategic;
  // Synthetic data is generated unless `csv_path` is set.
  synth::SynthConfig synth = {.seed = 7};
  std::filesystem::path csv_path;
  std::uint64_t seed = 7;
  double test_fraction = 0.10;
  double smoothing = preprocess::kDefaultSmoothing;
  gmm::OversampleConfig gmm;
  gbdt::BoostConfig boost;
  cost::CostParameters cost = {1.0, 1.5};
  // Test rows explained in the SHAP summary, a seeded random subset;
  // 0 explains the whole split.
  std::size_t shap_rows = 500;
  std::filesystem::path output_dir;

  void Validate() const;
  // Everything that influences the results; excludes the output directory.
  nlohmann::json ToJson() const;
  static RunConfig FromJson(const nlohmann::json& json);
  // FNV-1a of ToJson(), hex encoded.
  std::string Hash() const;

  std::uint64_t split_seed() const { return seed; }
  std::uint64_t gmm_seed() const { return seed + 1; }
};

// Everything fitted on the training rows.
struct TrainedStage {
  preprocess::Preprocessor preprocessor;
  std::optional<gmm::GmmModel> gmm;
  std::size_t synthetic_rows = 0;
  int gmm_components = 0;
  gbdt::TreeEnsemble model;
  gbdt::TrainTrace trace;
  std::vector<std::string> warnings;
};

// Fits preprocessing, oversampling and the ensemble on `train` only.
TrainedStage TrainOnSplit(const RawFrame& train, const RunConfig& config);

struct ModelEvaluation {
  metrics::Curve roc;
  metrics::Curve pr;
  metrics::ThresholdChoice best_g_mean;
  metrics::ThresholdChoice best_f1;
  metrics::Rates rates_at_best_f1;

  nlohmann::json ToJson() const;
};

ModelEvaluation EvaluateScores(std::span<const std::uint8_t> labels,
                               std::span<const double> probabilities);

struct StageRun {
  RunConfig config;
  std::vector<Feature> features;
  std::size_t input_records = 0;
  std::size_t dropped_missing = 0;
  RawFrame train_raw;
  RawFrame test_raw;
  TrainedStage trained;
  Dataset test;  // model view of test_raw
  std::vector<double> test_probabilities;
  ModelEvaluation evaluation;
  baseline::BaselineReport baseline;
  shap::ShapSummary shap;
  cost::CostAnalysis cost;
  std::vector<std::pair<std::string, double>> timings_ms;

  // Self-contained report. `include_timings` false yields a byte-stable dump.
  nlohmann::json Report(bool include_timings = true) const;
};

// Synthetic records or the CSV named by the config.
std::vector<ConnectionRecord> LoadRecords(const RunConfig& config);

// Each failing step raises StepError naming it.
StageRun RunStage(const RunConfig& config,
                  const std::vector<ConnectionRecord>& records);
StageRun RunStage(const RunConfig& config);

// Writes report.json, model.json, preprocess.json, curves/*.csv,
// baseline.csv and shap_summary.csv into `dir`. Files are staged in a
// sibling temporary directory that replaces `dir` once complete.
void WriteBundle(const StageRun& run, const std::filesystem::path& dir);

// A bundle loaded back for serving.
struct Bundle {
  DsmStage stage = DsmStage::kStrategic;
  std::vector<Feature> features;
  preprocess::Preprocessor preprocessor;
  gbdt::TreeEnsemble model;
  nlohmann::json report;
  std::string model_id;  // FNV-1a of model.json
  double threshold = 0.5;  // best-F1 probability threshold from the report
};

// Throws ParseError, VersionError or SchemaError on bad content.
Bundle LoadBundle(const std::filesystem::path& dir);

struct ComparisonRow {
  DsmStage stage;
  bool present = false;
  double model_auc_roc = 0.0;
  double baseline_auc_roc = 0.0;
  double model_auc_pr = 0.0;
  double baseline_auc_pr = 0.0;
  double precision = 0.0;  // at the best-F1 threshold
  std::optional<double> r_min;
};

struct StageComparison {
  std::array<ComparisonRow, 4> rows;

  nlohmann::json ToJson() const;
  std::string ToText() const;
};

// One row per stage in stage order; stages without a report are gaps.
StageComparison CompareStages(const std::vector<nlohmann::json>& reports);

std::string Fnv1aHex(std::string_view data);

}  // namespace paxconnect::pipeline

#endif  // PAXCONNECT_PIPELINE_H_
