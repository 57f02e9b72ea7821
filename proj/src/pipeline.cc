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

#include "paxconnect/pipeline.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "paxconnect/errors.h"
#include "paxconnect/ingest.h"

namespace paxconnect::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

template <typename Fn>
auto Step(const std::string& name, std::vector<std::pair<std::string, double>>* timings,
          Fn&& fn) {
  const auto start = std::chrono::steady_clock::now();
  const auto record = [&] {
    if (timings) {
      const auto elapsed = std::chrono::steady_clock::now() - start;
      timings->push_back(
          {name, std::chrono::duration<double, std::milli>(elapsed).count()});
    }
  };
  try {
    if constexpr (std::is_void_v<decltype(fn())>) {
      fn();
      record();
    } else {
      auto result = fn();
      record();
      return result;
    }
  } catch (const StepError&) {
    throw;
  } catch (const std::exception& e) {
    throw StepError(name, e.what());
  }
}

json SynthToJson(const synth::SynthConfig& c) {
  return {{"seed", c.seed},
          {"n_rows", c.n_rows},
          {"target_minority_fraction", c.target_minority_fraction},
          {"n_arrival_flights", c.n_arrival_flights},
          {"n_departure_flights", c.n_departure_flights},
          {"missingness_rate", c.missingness_rate},
          {"noise_scale", c.noise_scale}};
}

synth::SynthConfig SynthFromJson(const json& in) {
  synth::SynthConfig c;
  c.seed = in.value("seed", c.seed);
  c.n_rows = in.value("n_rows", c.n_rows);
  c.target_minority_fraction =
      in.value("target_minority_fraction", c.target_minority_fraction);
  c.n_arrival_flights = in.value("n_arrival_flights", c.n_arrival_flights);
  c.n_departure_flights = in.value("n_departure_flights", c.n_departure_flights);
  c.missingness_rate = in.value("missingness_rate", c.missingness_rate);
  c.noise_scale = in.value("noise_scale", c.noise_scale);
  return c;
}

json GmmToJson(const gmm::OversampleConfig& c) {
  return {{"num_components", c.num_components},
          {"min_rows_per_component", c.min_rows_per_component},
          {"target_ratio", c.target_ratio},
          {"max_iter", c.max_iter},
          {"tol", c.tol},
          {"snap_to_observed", c.snap_to_observed}};
}

gmm::OversampleConfig GmmFromJson(const json& in) {
  gmm::OversampleConfig c;
  c.num_components = in.value("num_components", c.num_components);
  c.min_rows_per_component = in.value("min_rows_per_component", c.min_rows_per_component);
  c.target_ratio = in.value("target_ratio", c.target_ratio);
  c.max_iter = in.value("max_iter", c.max_iter);
  c.tol = in.value("tol", c.tol);
  c.snap_to_observed = in.value("snap_to_observed", c.snap_to_observed);
  return c;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json ReadJsonFile(const fs::path& path) {
  try {
    return json::parse(ReadFile(path));
  } catch (const json::exception& e) {
    throw ParseError(path.filename().string() + ": " + e.what());
  }
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw Error("cannot write " + path.string());
}

template <typename Writer>
void WriteWith(const fs::path& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  writer(out);
  if (!out) throw Error("cannot write " + path.string());
}

std::vector<std::size_t> ShapSample(std::size_t n, std::size_t limit,
                                    std::uint64_t seed) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  if (limit == 0 || limit >= n) return rows;
  std::mt19937_64 rng(seed);
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(limit);
  std::sort(rows.begin(), rows.end());
  return rows;
}

DsmStage RequireStage(const std::string& name) {
  const auto stage = ParseStage(name);
  if (!stage) throw ConfigError("unknown stage '" + name + "'");
  return *stage;
}

std::optional<DsmStage> StageOfReport(const json& report) {
  if (!report.is_object() || !report.contains("stage")) return std::nullopt;
  return RequireStage(report.at("stage").get<std::string>());
}

}  // namespace

std::string Fnv1aHex(std::string_view data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (const unsigned char c : data) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << hash;
  return out.str();
}

void RunConfig::Validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  if (!(smoothing >= 0.0)) throw ConfigError("smoothing must be >= 0");
  if (gmm.num_components < 1) throw ConfigError("gmm.num_components must be >= 1");
  if (gmm.min_rows_per_component < 1) {
    throw ConfigError("gmm.min_rows_per_component must be >= 1");
  }
  if (!(gmm.target_ratio > 0.0)) throw ConfigError("gmm.target_ratio must be > 0");
  boost.Validate();
  cost.Validate();
  if (csv_path.empty()) synth.Validate();
}

json RunConfig::ToJson() const {
  json out = {{"stage", StageName(stage)},
              {"seed", seed},
              {"test_fraction", test_fraction},
              {"smoothing", smoothing},
              {"gmm", GmmToJson(gmm)},
              {"boost", boost.ToJson()},
              {"cost", {{"c_prev", cost.c_prev}, {"r", cost.r}}},
              {"shap_rows", shap_rows}};
  if (csv_path.empty()) {
    out["data"] = {{"source", "synthetic"}, {"synth", SynthToJson(synth)}};
  } else {
    out["data"] = {{"source", "csv"}, {"path", csv_path.string()}};
  }
  return out;
}

RunConfig RunConfig::FromJson(const json& in) {
  RunConfig c;
  try {
    if (in.contains("stage")) c.stage = RequireStage(in.at("stage").get<std::string>());
    c.seed = in.value("seed", c.seed);
    c.test_fraction = in.value("test_fraction", c.test_fraction);
    c.smoothing = in.value("smoothing", c.smoothing);
    if (in.contains("gmm")) c.gmm = GmmFromJson(in.at("gmm"));
    if (in.contains("boost")) c.boost = gbdt::BoostConfig::FromJson(in.at("boost"));
    if (in.contains("cost")) {
      c.cost.c_prev = in.at("cost").value("c_prev", c.cost.c_prev);
      c.cost.r = in.at("cost").value("r", c.cost.r);
    }
    c.shap_rows = in.value("shap_rows", c.shap_rows);
    if (in.contains("data")) {
      const json& data = in.at("data");
      if (data.value("source", "synthetic") == "csv") {
        c.csv_path = data.at("path").get<std::string>();
      } else if (data.contains("synth")) {
        c.synth = SynthFromJson(data.at("synth"));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
  return c;
}

std::string RunConfig::Hash() const { return Fnv1aHex(ToJson().dump()); }

TrainedStage TrainOnSplit(const RawFrame& train, const RunConfig& config) {
  TrainedStage out;
  out.preprocessor = preprocess::Preprocessor(config.smoothing);
  out.preprocessor.Fit(train);
  const Dataset encoded = out.preprocessor.Transform(train);
  gmm::OversampleResult oversampled =
      gmm::OversampleMinority(encoded, config.gmm, config.gmm_seed());
  out.gmm = std::move(oversampled.model);
  out.synthetic_rows = oversampled.synthetic_rows;
  out.gmm_components = oversampled.components_used;
  out.warnings = std::move(oversampled.warnings);
  out.model = gbdt::Train(oversampled.augmented, config.boost, &out.trace);
  return out;
}

json ModelEvaluation::ToJson() const {
  return {{"auc_roc", roc.auc},
          {"auc_pr", pr.auc},
          {"best_g_mean", best_g_mean.ToJson()},
          {"best_f1", best_f1.ToJson()},
          {"rates_at_best_f1", rates_at_best_f1.ToJson()}};
}

ModelEvaluation EvaluateScores(std::span<const std::uint8_t> labels,
                               std::span<const double> probabilities) {
  ModelEvaluation out;
  out.roc = metrics::RocCurve(labels, probabilities);
  out.pr = metrics::PrCurve(labels, probabilities);
  out.best_g_mean =
      metrics::BestThreshold(labels, probabilities, metrics::Objective::kGMean);
  out.best_f1 = metrics::BestThreshold(labels, probabilities, metrics::Objective::kF1);
  out.rates_at_best_f1 = metrics::ComputeRates(out.best_f1.counts);
  return out;
}

json StageRun::Report(bool include_timings) const {
  json feature_names = json::array();
  for (const Feature f : features) feature_names.push_back(FeatureName(f));
  const std::size_t train_pos =
      std::count(train_raw.labels.begin(), train_raw.labels.end(), 1);
  const std::size_t test_pos =
      std::count(test_raw.labels.begin(), test_raw.labels.end(), 1);
  const std::size_t kept = train_raw.num_rows() + test_raw.num_rows();
  json out = {
      {"version", kReportVersion},
      {"stage", StageName(config.stage)},
      {"config", config.ToJson()},
      {"config_hash", config.Hash()},
      {"seeds",
       {{"data", config.csv_path.empty() ? json(config.synth.seed) : json(nullptr)},
        {"split", config.split_seed()},
        {"gmm", config.gmm_seed()},
        {"boost", config.boost.seed}}},
      {"features", std::move(feature_names)},
      {"time_feature", FeatureName(ConnectionTimeFeature(config.stage))},
      {"dataset",
       {{"input_records", input_records},
        {"dropped_missing", dropped_missing},
        {"rows", kept},
        {"train_rows", train_raw.num_rows()},
        {"test_rows", test_raw.num_rows()},
        {"train_positives", train_pos},
        {"test_positives", test_pos},
        {"minority_fraction",
         kept ? static_cast<double>(train_pos + test_pos) / static_cast<double>(kept)
              : 0.0},
        {"synthetic_rows", trained.synthetic_rows},
        {"gmm_components", trained.gmm_components},
        {"test_row_ids_hash",
         Fnv1aHex(std::string_view(
             reinterpret_cast<const char*>(test_raw.row_ids.data()),
             test_raw.row_ids.size() * sizeof(std::int64_t)))}}},
      {"training",
       {{"trees", trained.model.trees().size()},
        {"final_train_loss",
         trained.trace.train_loss.empty() ? 0.0 : trained.trace.train_loss.back()},
        {"warnings", trained.warnings}}},
      {"model", evaluation.ToJson()},
      {"baseline", baseline.ToJson()},
      {"shap", shap.ToJson()},
      {"cost", cost.ToJson()},
  };
  if (include_timings) {
    json timings = json::object();
    for (const auto& [name, ms] : timings_ms) timings[name] = ms;
    out["timings_ms"] = std::move(timings);
  }
  return out;
}

std::vector<ConnectionRecord> LoadRecords(const RunConfig& config) {
  if (config.csv_path.empty()) return synth::Generate(config.synth);
  // Only the columns of the configured stage are required.
  const auto stage_features = StageFeatures(config.stage);
  return IngestCsv(config.csv_path, stage_features).records;
}

StageRun RunStage(const RunConfig& config,
                  const std::vector<ConnectionRecord>& records) {
  Step("validate config", nullptr, [&] { config.Validate(); });
  StageRun run;
  run.config = config;
  auto* timings = &run.timings_ms;
  run.input_records = records.size();
  run.features = StageFeatures(config.stage);

  const RawFrame frame = Step("select features", timings, [&] {
    DeletionResult kept = ListwiseDelete(records, run.features);
    run.dropped_missing = kept.dropped;
    RawFrame raw = BuildRawFrame(kept.kept, run.features);
    // Row ids refer to positions in the input records.
    for (std::size_t i = 0; i < raw.row_ids.size(); ++i) {
      raw.row_ids[i] = static_cast<std::int64_t>(kept.kept_indices[i]);
    }
    return raw;
  });

  Step("split", timings, [&] {
    const auto split = preprocess::StratifiedSplit(frame.labels, config.test_fraction,
                                                   config.split_seed());
    run.train_raw = frame.Select(split.train);
    run.test_raw = frame.Select(split.test);
  });

  run.trained = Step("train", timings, [&] { return TrainOnSplit(run.train_raw, config); });

  Step("score", timings, [&] {
    run.test = run.trained.preprocessor.Transform(run.test_raw);
    run.test_probabilities = run.trained.model.PredictProba(run.test);
  });

  Step("baseline", timings, [&] {
    run.baseline = baseline::EvaluateBaseline(run.test_raw, config.stage);
  });

  Step("metrics", timings, [&] {
    run.evaluation = EvaluateScores(run.test.labels, run.test_probabilities);
  });

  Step("shap", timings, [&] {
    const auto rows = ShapSample(run.test.num_rows(), config.shap_rows, config.seed + 2);
    run.shap = shap::Summarize(run.trained.model, run.test.Select(rows));
  });

  Step("cost", timings, [&] {
    run.cost = cost::CostReport(run.evaluation.best_f1.counts, config.cost, config.stage);
  });
  return run;
}

StageRun RunStage(const RunConfig& config) {
  Step("validate config", nullptr, [&] { config.Validate(); });
  const auto records = Step("load data", nullptr, [&] { return LoadRecords(config); });
  return RunStage(config, records);
}

void WriteBundle(const StageRun& run, const fs::path& dir) {
  Step("write bundle", nullptr, [&] {
    const fs::path target = fs::absolute(dir).lexically_normal();
    const fs::path parent = target.parent_path();
    fs::create_directories(parent);
    const fs::path staging =
        parent / ("." + target.filename().string() + ".tmp-" +
                  Fnv1aHex(target.string() + std::to_string(std::chrono::steady_clock::now()
                                                                .time_since_epoch()
                                                                .count())));
    fs::remove_all(staging);
    try {
      fs::create_directories(staging / "curves");
      WriteFile(staging / "report.json", run.Report().dump(2) + "\n");
      WriteFile(staging / "model.json", run.trained.model.Serialize());
      json pre = run.trained.preprocessor.ToJson();
      pre["stage"] = StageName(run.config.stage);
      WriteFile(staging / "preprocess.json", pre.dump(2) + "\n");
      WriteWith(staging / "curves" / "model_roc.csv",
                [&](std::ostream& o) { run.evaluation.roc.WriteCsv(o); });
      WriteWith(staging / "curves" / "model_pr.csv",
                [&](std::ostream& o) { run.evaluation.pr.WriteCsv(o); });
      WriteWith(staging / "curves" / "baseline_roc.csv",
                [&](std::ostream& o) { run.baseline.roc.WriteCsv(o); });
      WriteWith(staging / "curves" / "baseline_pr.csv",
                [&](std::ostream& o) { run.baseline.pr.WriteCsv(o); });
      WriteWith(staging / "baseline.csv",
                [&](std::ostream& o) { run.baseline.WriteCsv(o); });
      WriteWith(staging / "shap_summary.csv",
                [&](std::ostream& o) { run.shap.WriteCsv(o); });
      if (run.trained.gmm) {
        WriteFile(staging / "gmm.json", run.trained.gmm->ToJson().dump() + "\n");
      }
      fs::remove_all(target);
      fs::rename(staging, target);
    } catch (...) {
      std::error_code ignored;
      fs::remove_all(staging, ignored);
      throw;
    }
  });
}

Bundle LoadBundle(const fs::path& dir) {
  Bundle out;
  const std::string model_text = ReadFile(dir / "model.json");
  out.model = gbdt::TreeEnsemble::Deserialize(model_text);
  out.model_id = Fnv1aHex(model_text);
  const json pre = ReadJsonFile(dir / "preprocess.json");
  try {
    out.preprocessor = preprocess::Preprocessor::FromJson(pre);
    out.report = ReadJsonFile(dir / "report.json");
    if (out.report.value("version", 0) != kReportVersion) {
      throw VersionError("report.json: unsupported version");
    }
    out.stage = RequireStage(out.report.at("stage").get<std::string>());
    out.threshold =
        out.report.at("model").at("best_f1").at("threshold").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  }
  out.features = StageFeatures(out.stage);
  const auto& columns = out.preprocessor.columns();
  if (columns.size() != out.features.size() ||
      out.model.num_features() != out.features.size()) {
    throw SchemaError("bundle: feature count does not match the stage");
  }
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name != FeatureName(out.features[i]) ||
        out.model.feature_names()[i] != columns[i].name) {
      throw SchemaError("bundle: feature '" + columns[i].name +
                        "' does not match the stage schema");
    }
  }
  return out;
}

json StageComparison::ToJson() const {
  json out = json::array();
  for (const auto& row : rows) {
    json item = {{"stage", StageName(row.stage)}, {"present", row.present}};
    if (row.present) {
      item["model_auc_roc"] = row.model_auc_roc;
      item["baseline_auc_roc"] = row.baseline_auc_roc;
      item["model_auc_pr"] = row.model_auc_pr;
      item["baseline_auc_pr"] = row.baseline_auc_pr;
      item["precision"] = row.precision;
      item["r_min"] = row.r_min ? json(*row.r_min) : json(nullptr);
    }
    out.push_back(std::move(item));
  }
  return out;
}

std::string StageComparison::ToText() const {
  std::ostringstream out;
  out << std::left << std::setw(16) << "stage" << std::right << std::setw(10)
      << "auc_roc" << std::setw(10) << "base_roc" << std::setw(10) << "auc_pr"
      << std::setw(10) << "base_pr" << std::setw(11) << "precision" << std::setw(8)
      << "r_min" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& row : rows) {
    out << std::left << std::setw(16) << StageName(row.stage) << std::right;
    if (!row.present) {
      out << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(10) << "-"
          << std::setw(10) << "-" << std::setw(11) << "-" << std::setw(8) << "-"
          << '\n';
      continue;
    }
    out << std::setw(10) << row.model_auc_roc << std::setw(10) << row.baseline_auc_roc
        << std::setw(10) << row.model_auc_pr << std::setw(10) << row.baseline_auc_pr
        << std::setw(11) << row.precision;
    if (row.r_min) {
      out << std::setw(8) << std::setprecision(2) << *row.r_min << std::setprecision(4);
    } else {
      out << std::setw(8) << "-";
    }
    out << '\n';
  }
  return out.str();
}

StageComparison CompareStages(const std::vector<json>& reports) {
  StageComparison out;
  for (std::size_t i = 0; i < std::size(kAllStages); ++i) out.rows[i].stage = kAllStages[i];
  for (const auto& report : reports) {
    std::optional<DsmStage> stage;
    try {
      stage = StageOfReport(report);
    } catch (const Error& e) {
      throw ParseError(std::string("report: ") + e.what());
    }
    if (!stage) throw ParseError("report: missing stage");
    ComparisonRow& row = out.rows[static_cast<std::size_t>(*stage)];
    try {
      row.present = true;
      row.model_auc_roc = report.at("model").at("auc_roc").get<double>();
      row.model_auc_pr = report.at("model").at("auc_pr").get<double>();
      row.baseline_auc_roc = report.at("baseline").at("auc_roc").get<double>();
      row.baseline_auc_pr = report.at("baseline").at("auc_pr").get<double>();
      row.precision =
          report.at("model").at("rates_at_best_f1").at("precision").get<double>();
      const json& c = report.at("cost");
      if (c.value("applicable", false) && c.contains("r_min") && !c.at("r_min").is_null()) {
        row.r_min = c.at("r_min").get<double>();
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("report: ") + e.what());
    }
  }
  return out;
}

}  // namespace paxconnect::pipeline
