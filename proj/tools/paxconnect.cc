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

// paxconnect command line: synthetic data, stage runs, baselines,
// explanations, cost analysis, stage comparison and the HTTP service.
//
// Settings resolve as flags > environment (PAXCONNECT_*) > --config file.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "paxconnect/baseline.h"
#include "paxconnect/cost.h"
#include "paxconnect/errors.h"
#include "paxconnect/ingest.h"
#include "paxconnect/pipeline.h"
#include "paxconnect/preprocess.h"
#include "paxconnect/service.h"
#include "paxconnect/synthgen.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace paxconnect;

constexpr int kUsageExit = 2;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Values given on the command line; unset ones fall back to env, then file.
struct Settings {
  std::string config_file;
  std::string stage;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> rows;
  std::optional<double> minority;
  std::string csv;
  std::string out;
  std::optional<int> rounds;
  std::optional<double> learning_rate;
  std::optional<int> max_depth;
  std::optional<int> max_bins;
  std::optional<int> components;
  std::optional<double> r;
  std::optional<double> c_prev;
  std::optional<std::size_t> shap_rows;
  bool json_output = false;
};

std::optional<std::string> Env(const char* name) {
  const char* value = std::getenv(name);
  if (!value || !*value) return std::nullopt;
  return std::string(value);
}

template <typename T>
std::optional<T> EnvNumber(const char* name) {
  const auto text = Env(name);
  if (!text) return std::nullopt;
  std::istringstream in(*text);
  T value{};
  if (!(in >> value) || !in.eof()) {
    throw UsageError(std::string("environment variable ") + name + " is not a number");
  }
  return value;
}

DsmStage RequireStage(const std::string& name) {
  const auto stage = ParseStage(name);
  if (!stage) {
    throw UsageError("unknown stage '" + name +
                     "' (expected strategic, pre-tactical, tactical or post-operations)");
  }
  return *stage;
}

template <typename T>
void Resolve(T& target, const std::optional<T>& flag, const std::optional<T>& env) {
  if (flag) {
    target = *flag;
  } else if (env) {
    target = *env;
  }
}

pipeline::RunConfig BuildRunConfig(const Settings& s) {
  pipeline::RunConfig config;
  if (!s.config_file.empty()) {
    std::ifstream in(s.config_file);
    if (!in) throw UsageError("cannot read config file " + s.config_file);
    json file;
    try {
      file = json::parse(in);
    } catch (const json::exception& e) {
      throw UsageError("config file: " + std::string(e.what()));
    }
    config = pipeline::RunConfig::FromJson(file);
  }
  std::optional<std::uint64_t> seed = s.seed;
  if (!seed) seed = EnvNumber<std::uint64_t>("PAXCONNECT_SEED");
  if (seed) {
    config.seed = *seed;
    config.synth.seed = *seed;
  }
  Resolve(config.synth.n_rows, s.rows, EnvNumber<std::size_t>("PAXCONNECT_ROWS"));
  Resolve(config.synth.target_minority_fraction, s.minority,
          EnvNumber<double>("PAXCONNECT_MINORITY"));
  Resolve(config.boost.n_rounds, s.rounds, EnvNumber<int>("PAXCONNECT_ROUNDS"));
  Resolve(config.boost.learning_rate, s.learning_rate,
          EnvNumber<double>("PAXCONNECT_LEARNING_RATE"));
  Resolve(config.boost.max_depth, s.max_depth, EnvNumber<int>("PAXCONNECT_MAX_DEPTH"));
  Resolve(config.boost.max_bins, s.max_bins, EnvNumber<int>("PAXCONNECT_MAX_BINS"));
  Resolve(config.gmm.num_components, s.components,
          EnvNumber<int>("PAXCONNECT_GMM_COMPONENTS"));
  Resolve(config.cost.r, s.r, EnvNumber<double>("PAXCONNECT_R"));
  Resolve(config.cost.c_prev, s.c_prev, EnvNumber<double>("PAXCONNECT_C_PREV"));
  Resolve(config.shap_rows, s.shap_rows, EnvNumber<std::size_t>("PAXCONNECT_SHAP_ROWS"));
  std::optional<std::string> csv =
      s.csv.empty() ? Env("PAXCONNECT_CSV") : std::optional<std::string>(s.csv);
  if (csv) config.csv_path = *csv;
  std::optional<std::string> stage =
      s.stage.empty() ? Env("PAXCONNECT_STAGE") : std::optional<std::string>(s.stage);
  if (stage && *stage != "all") config.stage = RequireStage(*stage);
  try {
    config.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return config;
}

std::string StageArgument(const Settings& s) {
  if (!s.stage.empty()) return s.stage;
  if (const auto env = Env("PAXCONNECT_STAGE")) return *env;
  return {};
}

std::string OutputDir(const Settings& s, const std::string& fallback) {
  if (!s.out.empty()) return s.out;
  if (const auto env = Env("PAXCONNECT_OUT")) return *env;
  return fallback;
}

void AddDataOptions(CLI::App* cmd, Settings& s) {
  cmd->add_option("--config", s.config_file, "JSON run configuration file");
  cmd->add_option("--seed", s.seed, "Seed for data generation, split and sampling");
  cmd->add_option("--rows", s.rows, "Synthetic rows to generate");
  cmd->add_option("--minority", s.minority, "Synthetic miss fraction");
  cmd->add_option("--csv", s.csv, "Read connections from a CSV file instead");
}

void AddModelOptions(CLI::App* cmd, Settings& s) {
  cmd->add_option("--rounds", s.rounds, "Boosting rounds");
  cmd->add_option("--learning-rate", s.learning_rate, "Boosting learning rate");
  cmd->add_option("--max-depth", s.max_depth, "Maximum tree depth");
  cmd->add_option("--max-bins", s.max_bins, "Histogram bins per feature (0 = exact)");
  cmd->add_option("--components", s.components, "GMM components for oversampling");
  cmd->add_option("--r", s.r, "Reaction/prevention cost ratio");
  cmd->add_option("--c-prev", s.c_prev, "Average prevention cost");
  cmd->add_option("--shap-rows", s.shap_rows,
                  "Test rows in the SHAP summary (0 = whole test split)");
}

std::string Fixed(double value, int digits = 4) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(digits) << value;
  return out.str();
}

void Print(const Settings& s, const json& data, const std::string& text) {
  if (s.json_output) {
    std::cout << data.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

json LoadReport(const std::string& path) {
  fs::path p(path);
  if (fs::is_directory(p)) p /= "report.json";
  std::ifstream in(p);
  if (!in) throw UsageError("cannot read report " + p.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(p.string() + ": " + e.what());
  }
}

int CmdSynth(const Settings& s) {
  const pipeline::RunConfig config = BuildRunConfig(s);
  const std::string out = OutputDir(s, "connections.csv");
  const auto data = synth::GenerateDetailed(config.synth);
  WriteCsv(fs::path(out), data.records);
  std::size_t missed = 0;
  for (const auto& r : data.records) missed += r.missed;
  const json summary = {{"path", out},
                        {"rows", data.records.size()},
                        {"missed", missed},
                        {"minority_fraction",
                         static_cast<double>(missed) / data.records.size()},
                        {"intercept", data.intercept},
                        {"seed", config.synth.seed}};
  Print(s, summary,
        "wrote " + std::to_string(data.records.size()) + " connections to " + out +
            " (" + std::to_string(missed) + " missed)\n");
  return 0;
}

std::string RunSummary(const json& report) {
  std::ostringstream out;
  out << report.at("stage").get<std::string>() << ": model AUC_ROC "
      << Fixed(report["model"]["auc_roc"]) << ", AUC_PR "
      << Fixed(report["model"]["auc_pr"]) << "; baseline AUC_ROC "
      << Fixed(report["baseline"]["auc_roc"]) << ", AUC_PR "
      << Fixed(report["baseline"]["auc_pr"]) << "; top feature "
      << report["shap"]["importance"][0]["feature"].get<std::string>() << '\n';
  return out.str();
}

int CmdRun(const Settings& s) {
  pipeline::RunConfig config = BuildRunConfig(s);
  const std::string stage_arg = StageArgument(s);
  if (stage_arg.empty()) throw UsageError("--stage is required");
  std::vector<DsmStage> stages;
  if (stage_arg == "all") {
    stages.assign(std::begin(kAllStages), std::end(kAllStages));
  } else {
    stages.push_back(config.stage);
  }
  const fs::path out = OutputDir(s, "runs");
  const auto records = pipeline::LoadRecords(config);
  json reports = json::array();
  std::string text;
  for (const DsmStage stage : stages) {
    config.stage = stage;
    std::cerr << "running " << StageName(stage) << "...\n";
    const auto run = pipeline::RunStage(config, records);
    const fs::path dir = stages.size() > 1 ? out / std::string(StageName(stage)) : out;
    pipeline::WriteBundle(run, dir);
    json report = run.Report();
    report["bundle"] = dir.string();
    text += RunSummary(report) + "  bundle: " + dir.string() + "\n";
    reports.push_back(std::move(report));
  }
  Print(s, reports.size() == 1 ? reports[0] : reports, text);
  return 0;
}

int CmdBaseline(const Settings& s, bool full) {
  const pipeline::RunConfig config = BuildRunConfig(s);
  if (StageArgument(s).empty()) throw UsageError("--stage is required");
  const auto records = pipeline::LoadRecords(config);
  const auto features = StageFeatures(config.stage);
  const auto kept = ListwiseDelete(records, features);
  RawFrame frame = BuildRawFrame(kept.kept, features);
  if (!full) {
    const auto split = preprocess::StratifiedSplit(frame.labels, config.test_fraction,
                                                   config.split_seed());
    frame = frame.Select(split.test);
  }
  const auto report = baseline::EvaluateBaseline(frame, config.stage);
  if (!s.out.empty()) {
    std::ofstream csv(s.out);
    report.WriteCsv(csv);
    if (!csv) throw Error("cannot write " + s.out);
  }
  std::ostringstream text;
  text << StageName(config.stage) << " baseline on "
       << ConnectionTimeKindName(report.time_kind) << " connection time ("
       << frame.num_rows() << " rows)\n"
       << "  AUC_ROC " << Fixed(report.roc.auc) << ", AUC_PR " << Fixed(report.pr.auc)
       << '\n'
       << "  60 min: TPR " << Fixed(report.mct.rates.tpr) << ", FPR "
       << Fixed(report.mct.rates.fpr) << ", G-mean " << Fixed(report.mct.rates.g_mean)
       << ", F1 " << Fixed(report.mct.rates.f1) << '\n'
       << "  best G-mean " << Fixed(report.best_g_mean.value) << " at "
       << report.best_g_mean.threshold << " min; best F1 "
       << Fixed(report.best_f1.value) << " at " << report.best_f1.threshold
       << " min\n";
  Print(s, report.ToJson(), text.str());
  return 0;
}

int CmdExplain(const Settings& s, const std::string& model_dir,
               const std::string& request_arg) {
  const std::string dir =
      !model_dir.empty() ? model_dir : Env("PAXCONNECT_MODEL_DIR").value_or("");
  if (dir.empty()) throw UsageError("--model-dir is required");
  std::string text = request_arg;
  if (request_arg == "-") {
    std::ostringstream buffer;
    buffer << std::cin.rdbuf();
    text = buffer.str();
  } else if (fs::is_regular_file(request_arg)) {
    std::ifstream in(request_arg);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    text = buffer.str();
  }
  json request;
  try {
    request = json::parse(text);
  } catch (const json::exception& e) {
    throw UsageError(std::string("request is not valid JSON: ") + e.what());
  }
  const json features = request.contains("features") ? request["features"] : request;
  const service::LoadedModel model(pipeline::LoadBundle(dir));
  json response;
  try {
    response = service::PredictOne(model, features, model.bundle().threshold);
  } catch (const service::RequestError& e) {
    throw UsageError(e.what());
  }
  std::ostringstream out;
  out << "probability " << Fixed(response["probability"]) << " (margin "
      << Fixed(response["margin"]) << ", base " << Fixed(response["base_value"])
      << ")\n";
  std::vector<std::pair<std::string, double>> items;
  for (const auto& item : response["shap"]) {
    items.push_back({item["feature"].get<std::string>(), item["value"].get<double>()});
  }
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
    return std::abs(a.second) > std::abs(b.second);
  });
  for (const auto& [name, value] : items) {
    out << "  " << std::left << std::setw(22) << name << std::right << std::setw(10)
        << Fixed(value) << '\n';
  }
  Print(s, response, out.str());
  return 0;
}

int CmdCost(const Settings& s, const std::string& report_path) {
  const json report = LoadReport(report_path);
  cost::CostParameters params;
  if (report.contains("config") && report["config"].contains("cost")) {
    params.c_prev = report["config"]["cost"].value("c_prev", params.c_prev);
    params.r = report["config"]["cost"].value("r", params.r);
  }
  Resolve(params.r, s.r, EnvNumber<double>("PAXCONNECT_R"));
  Resolve(params.c_prev, s.c_prev, EnvNumber<double>("PAXCONNECT_C_PREV"));
  try {
    params.Validate();
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  DsmStage stage;
  metrics::ConfusionCounts counts;
  try {
    stage = RequireStage(report.at("stage").get<std::string>());
    counts = metrics::ConfusionCounts::FromJson(report.at("model").at("best_f1").at("counts"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  const auto analysis = cost::CostReport(counts, params, stage);
  const auto rates = metrics::ComputeRates(counts);
  json out = analysis.ToJson();
  out["stage"] = StageName(stage);
  out["precision"] = rates.precision;
  std::ostringstream text;
  text << StageName(stage) << ": precision " << Fixed(rates.precision) << '\n';
  if (!analysis.applicable) {
    text << "  cost analysis not applicable: no prevention is possible after operations\n";
  } else {
    text << "  r_min " << (analysis.r_min_finite ? Fixed(analysis.r_min, 2) : "inf")
         << ", r " << params.r << ", delta_C " << Fixed(analysis.delta_c, 2) << '\n'
         << "  preventions " << analysis.prevention_count << ", reactions with model "
         << analysis.reaction_count_with_model << ", reactions without "
         << analysis.reaction_count_without << '\n'
         << "  " << (analysis.delta_c < 0 ? "prevention pays" : "prevention does not pay")
         << '\n';
  }
  Print(s, out, text.str());
  return 0;
}

int CmdCompare(const Settings& s, const std::vector<std::string>& paths) {
  std::vector<json> reports;
  for (const auto& path : paths) reports.push_back(LoadReport(path));
  const auto table = pipeline::CompareStages(reports);
  Print(s, table.ToJson(), table.ToText());
  return 0;
}

service::HttpServer* g_server = nullptr;

void HandleSignal(int) {
  if (g_server) g_server->Stop();
}

int CmdServe(const std::string& model_dir_flag, std::optional<int> port_flag,
             const std::string& host, const std::string& ui_dir) {
  const std::string model_dir =
      !model_dir_flag.empty() ? model_dir_flag : Env("PAXCONNECT_MODEL_DIR").value_or("");
  int port = 8080;
  Resolve(port, port_flag, EnvNumber<int>("PAXCONNECT_PORT"));
  service::Service svc;
  if (!model_dir.empty()) {
    try {
      svc.Load(model_dir);
      std::cerr << json{{"event", "model_loaded"}, {"model_dir", model_dir}}.dump()
                << '\n';
    } catch (const std::exception& e) {
      std::cerr << json{{"event", "model_load_failed"}, {"error", e.what()}}.dump()
                << '\n';
    }
  }
  service::HttpServer server(svc, ui_dir);
  const int bound = server.Bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot bind " << host << ':' << port << '\n';
    return 1;
  }
  g_server = &server;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  std::cerr << json{{"event", "listening"}, {"host", host}, {"port", bound}}.dump() << '\n';
  server.Listen();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Missed-connection risk models: training, evaluation and serving"};
  app.require_subcommand(1);
  Settings s;
  app.add_flag("--json", s.json_output, "Print machine-readable JSON to stdout");

  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic connections CSV");
  AddDataOptions(synth_cmd, s);
  synth_cmd->add_option("--out", s.out, "Output CSV path");

  auto* run_cmd = app.add_subcommand("run", "Train and evaluate one stage (or all)");
  run_cmd->add_option("--stage", s.stage, "Stage name or 'all'");
  AddDataOptions(run_cmd, s);
  AddModelOptions(run_cmd, s);
  run_cmd->add_option("--out", s.out, "Bundle directory");

  bool full = false;
  auto* baseline_cmd =
      app.add_subcommand("baseline", "Evaluate the connection-time threshold rule");
  baseline_cmd->add_option("--stage", s.stage, "Stage name");
  AddDataOptions(baseline_cmd, s);
  baseline_cmd->add_flag("--full", full, "Use every row instead of the test split");
  baseline_cmd->add_option("--out", s.out, "Write the sweep as CSV");

  std::string model_dir;
  std::string request = "-";
  auto* explain_cmd = app.add_subcommand("explain", "Explain one prediction");
  explain_cmd->add_option("--model-dir", model_dir, "Bundle directory");
  explain_cmd->add_option("--request", request,
                          "Feature map as JSON text, a file path, or '-' for stdin");

  std::string report_path;
  auto* cost_cmd = app.add_subcommand("cost", "Cost analysis of a stage report");
  cost_cmd->add_option("--report", report_path, "report.json or bundle directory")
      ->required();
  cost_cmd->add_option("--r", s.r, "Reaction/prevention cost ratio");
  cost_cmd->add_option("--c-prev", s.c_prev, "Average prevention cost");

  std::vector<std::string> compare_paths;
  auto* compare_cmd = app.add_subcommand("compare", "Compare stage reports");
  compare_cmd->add_option("reports", compare_paths, "report.json files or bundle dirs")
      ->required();

  std::optional<int> port;
  std::string host = "127.0.0.1";
  std::string ui_dir;
  auto* serve_cmd = app.add_subcommand("serve", "Serve predictions over HTTP");
  serve_cmd->add_option("--model-dir", model_dir, "Bundle directory");
  serve_cmd->add_option("--port", port, "Listen port");
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--ui-dir", ui_dir, "Static files served under /");

  for (auto* cmd : app.get_subcommands({})) {
    cmd->add_flag("--json", s.json_output, "Print machine-readable JSON to stdout");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageExit;
  }

  try {
    if (*synth_cmd) return CmdSynth(s);
    if (*run_cmd) return CmdRun(s);
    if (*baseline_cmd) return CmdBaseline(s, full);
    if (*explain_cmd) return CmdExplain(s, model_dir, request);
    if (*cost_cmd) return CmdCost(s, report_path);
    if (*compare_cmd) return CmdCompare(s, compare_paths);
    if (*serve_cmd) return CmdServe(model_dir, port, host, ui_dir);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsageExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
