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

#include "paxconnect/service.h"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>

#include "httplib.h"

namespace paxconnect::service {
namespace {

using nlohmann::json;

HttpResponse JsonResponse(int status, const json& body) {
  return {status, body.dump()};
}

HttpResponse ErrorResponse(int status, const std::string& message,
                           const std::string& field = {}) {
  json body = {{"error", message}};
  if (!field.empty()) body["field"] = field;
  return JsonResponse(status, body);
}

json ParseBody(std::string_view body) {
  try {
    json parsed = json::parse(body);
    if (!parsed.is_object()) throw RequestError(400, "request body must be a JSON object");
    return parsed;
  } catch (const json::exception& e) {
    throw RequestError(400, std::string("malformed JSON: ") + e.what());
  }
}

void CheckStage(const LoadedModel& model, const json& request) {
  if (!request.contains("stage") || !request.at("stage").is_string()) {
    throw RequestError(400, "missing string field 'stage'", "stage");
  }
  const std::string name = request.at("stage").get<std::string>();
  const auto stage = ParseStage(name);
  if (!stage) throw RequestError(400, "unknown stage '" + name + "'", "stage");
  if (*stage != model.bundle().stage) {
    throw RequestError(409, "request stage '" + std::string(StageName(*stage)) +
                                "' does not match the loaded model stage '" +
                                std::string(StageName(model.bundle().stage)) + "'",
                       "stage");
  }
}

struct Range {
  double lo;
  double hi;
};

std::optional<Range> RangeOf(Feature feature) {
  switch (feature) {
    case Feature::kDepDay:
      return Range{0, 6};
    case Feature::kDepMonthDay:
      return Range{1, 31};
    case Feature::kAge:
      return Range{0, 120};
    case Feature::kIsGroup:
      return Range{0, 1};
    case Feature::kNBus:
      return Range{0, 1e6};
    default:
      return std::nullopt;
  }
}

RawValue ParseValue(Feature feature, const json& value) {
  const std::string name(FeatureName(feature));
  if (KindOf(feature) == FeatureKind::kCategorical) {
    if (!value.is_string()) {
      throw RequestError(400, "feature '" + name + "' must be a string", name);
    }
    const std::string token = value.get<std::string>();
    if (feature == Feature::kTrafficNetwork) {
      if (const auto network = ParseTrafficNetwork(token)) {
        return std::string(TrafficNetworkName(*network));
      }
    } else if (feature == Feature::kSex) {
      if (const auto sex = ParseSex(token)) return std::string(SexName(*sex));
    }
    return token;
  }
  double number = 0.0;
  if (value.is_boolean() && feature == Feature::kIsGroup) {
    number = value.get<bool>() ? 1.0 : 0.0;
  } else if (value.is_number()) {
    number = value.get<double>();
  } else {
    throw RequestError(400, "feature '" + name + "' must be a number", name);
  }
  if (!std::isfinite(number)) {
    throw RequestError(400, "feature '" + name + "' must be finite", name);
  }
  if (const auto range = RangeOf(feature)) {
    if (number < range->lo || number > range->hi) {
      throw RequestError(400, "feature '" + name + "' is out of range", name);
    }
  }
  if (feature == Feature::kIsGroup && number != 0.0 && number != 1.0) {
    throw RequestError(400, "feature 'Is Group' must be a boolean", name);
  }
  return number;
}

std::vector<RawValue> ParseFeatures(const LoadedModel& model, const json& features) {
  if (!features.is_object()) {
    throw RequestError(400, "'features' must be an object", "features");
  }
  const auto& stage_features = model.bundle().features;
  for (const auto& [key, unused] : features.items()) {
    const auto feature = ParseFeature(key);
    if (!feature || std::find(stage_features.begin(), stage_features.end(),
                              *feature) == stage_features.end()) {
      throw RequestError(400, "unknown feature '" + key + "' for stage " +
                                  std::string(StageName(model.bundle().stage)),
                         key);
    }
  }
  std::vector<RawValue> raw;
  for (const Feature feature : stage_features) {
    const std::string name(FeatureName(feature));
    const auto it = features.find(name);
    if (it == features.end() || it->is_null()) {
      throw RequestError(400, "missing feature '" + name + "'", name);
    }
    raw.push_back(ParseValue(feature, *it));
  }
  return raw;
}

double ThresholdOf(const LoadedModel& model, const json& request) {
  if (!request.contains("threshold")) return model.bundle().threshold;
  const json& t = request.at("threshold");
  if (!t.is_number() || !(t.get<double>() >= 0.0 && t.get<double>() <= 1.0)) {
    throw RequestError(400, "'threshold' must be a number in [0, 1]", "threshold");
  }
  return t.get<double>();
}

void Log(const std::string& method, const std::string& path, int status,
         double millis) {
  const json line = {{"method", method}, {"path", path}, {"status", status},
                     {"ms", std::round(millis * 1000.0) / 1000.0}};
  std::cerr << line.dump() << '\n';
}

}  // namespace

LoadedModel::LoadedModel(pipeline::Bundle bundle)
    : bundle_(std::move(bundle)), explainer_(bundle_.model) {}

void Service::Load(const std::filesystem::path& model_dir) {
  auto model = std::make_shared<const LoadedModel>(pipeline::LoadBundle(model_dir));
  std::lock_guard lock(mutex_);
  model_ = std::move(model);
  model_dir_ = model_dir;
}

void Service::SetModel(std::shared_ptr<const LoadedModel> model) {
  std::lock_guard lock(mutex_);
  model_ = std::move(model);
}

std::shared_ptr<const LoadedModel> Service::snapshot() const {
  std::lock_guard lock(mutex_);
  return model_;
}

json PredictOne(const LoadedModel& model, const json& features, double threshold) {
  const auto raw = ParseFeatures(model, features);
  const auto row = model.bundle().preprocessor.TransformRow(raw);
  const shap::ShapExplanation e = model.explainer().Explain(row);
  const double probability = gbdt::Sigmoid(e.margin);
  json shap_values = json::array();
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    shap_values.push_back(
        {{"feature", FeatureName(model.bundle().features[i])}, {"value", e.values[i]}});
  }
  return {{"stage", StageName(model.bundle().stage)},
          {"model_id", model.bundle().model_id},
          {"model_version", gbdt::kModelFormatVersion},
          {"probability", probability},
          {"margin", e.margin},
          {"base_value", e.base_value},
          {"threshold", threshold},
          {"predicted_label", probability >= threshold ? 1 : 0},
          {"shap", std::move(shap_values)}};
}

HttpResponse Service::Predict(std::string_view body) const {
  const auto model = snapshot();
  if (!model) return ErrorResponse(503, "no model loaded");
  try {
    const json request = ParseBody(body);
    CheckStage(*model, request);
    if (!request.contains("features")) {
      throw RequestError(400, "missing field 'features'", "features");
    }
    return JsonResponse(
        200, PredictOne(*model, request.at("features"), ThresholdOf(*model, request)));
  } catch (const RequestError& e) {
    return ErrorResponse(e.status(), e.what(), e.field());
  } catch (const Error& e) {
    return ErrorResponse(400, e.what());
  }
}

HttpResponse Service::WhatIf(std::string_view body) const {
  const auto model = snapshot();
  if (!model) return ErrorResponse(503, "no model loaded");
  try {
    const json request = ParseBody(body);
    CheckStage(*model, request);
    if (!request.contains("base") || !request.at("base").is_object()) {
      throw RequestError(400, "missing object field 'base'", "base");
    }
    const json perturbations = request.value("perturbations", json::array());
    if (!perturbations.is_array()) {
      throw RequestError(400, "'perturbations' must be an array", "perturbations");
    }
    const double threshold = ThresholdOf(*model, request);
    json results = json::array();
    for (const auto& perturbation : perturbations) {
      if (!perturbation.is_object()) {
        throw RequestError(400, "each perturbation must be an object", "perturbations");
      }
      json features = request.at("base");
      for (const auto& [key, value] : perturbation.items()) features[key] = value;
      results.push_back(PredictOne(*model, features, threshold));
    }
    return JsonResponse(200, {{"stage", StageName(model->bundle().stage)},
                              {"model_id", model->bundle().model_id},
                              {"results", std::move(results)}});
  } catch (const RequestError& e) {
    return ErrorResponse(e.status(), e.what(), e.field());
  } catch (const Error& e) {
    return ErrorResponse(400, e.what());
  }
}

HttpResponse Service::ModelInfo() const {
  const auto model = snapshot();
  if (!model) return ErrorResponse(503, "no model loaded");
  const auto& bundle = model->bundle();
  const auto& pre = bundle.preprocessor;
  json features = json::array();
  for (const Feature f : bundle.features) {
    const std::string name(FeatureName(f));
    json item = {{"name", name},
                 {"kind", KindOf(f) == FeatureKind::kCategorical ? "categorical"
                                                                 : "numeric"}};
    if (KindOf(f) == FeatureKind::kCategorical) {
      json levels = json::array();
      for (const auto& [level, unused] : pre.encoder().levels(name)) levels.push_back(level);
      item["levels"] = std::move(levels);
    } else if (f == Feature::kIsGroup) {
      item["type"] = "boolean";
    } else if (f == ConnectionTimeFeature(bundle.stage)) {
      item["unit"] = "minutes";
    }
    features.push_back(std::move(item));
  }
  const json& report = bundle.report;
  json info = {{"stage", StageName(bundle.stage)},
               {"model_id", bundle.model_id},
               {"model_version", gbdt::kModelFormatVersion},
               {"features", std::move(features)},
               {"time_feature", FeatureName(ConnectionTimeFeature(bundle.stage))},
               {"threshold", bundle.threshold},
               {"base_value", model->explainer().base_value()},
               {"num_trees", bundle.model.trees().size()},
               {"config_hash", report.value("config_hash", "")}};
  try {
    const json& rates = report.at("model").at("rates_at_best_f1");
    const double precision = rates.at("precision").get<double>();
    info["test_metrics"] = {{"auc_roc", report.at("model").at("auc_roc")},
                            {"auc_pr", report.at("model").at("auc_pr")},
                            {"precision", precision},
                            {"recall", rates.at("recall")}};
    info["r_min"] = precision > 0.0 ? json(1.0 / precision) : json(nullptr);
    info["cost_applicable"] = bundle.stage != DsmStage::kPostOperations;
  } catch (const json::exception&) {
    info["test_metrics"] = nullptr;
  }
  return JsonResponse(200, info);
}

HttpResponse Service::Health() const {
  const auto model = snapshot();
  return JsonResponse(200, {{"status", "ok"}, {"model_loaded", model != nullptr}});
}

HttpResponse Service::Reload(std::string_view body) {
  std::filesystem::path dir;
  {
    std::lock_guard lock(mutex_);
    dir = model_dir_;
  }
  try {
    if (!body.empty()) {
      const json request = ParseBody(body);
      if (request.contains("model_dir")) {
        if (!request.at("model_dir").is_string()) {
          throw RequestError(400, "'model_dir' must be a string", "model_dir");
        }
        dir = request.at("model_dir").get<std::string>();
      }
    }
    if (dir.empty()) throw RequestError(400, "no model directory to load", "model_dir");
    Load(dir);
  } catch (const RequestError& e) {
    return ErrorResponse(e.status(), e.what(), e.field());
  } catch (const std::exception& e) {
    return ErrorResponse(500, std::string("reload failed: ") + e.what());
  }
  return ModelInfo();
}

struct HttpServer::Impl {
  explicit Impl(Service& s) : service(s) {}
  Service& service;
  httplib::Server server;
};

HttpServer::HttpServer(Service& service, std::filesystem::path static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& server = impl_->server;
  Service* svc = &service;
  using Handler = std::function<HttpResponse(const httplib::Request&)>;
  const auto route = [](Handler handler) {
    return [handler = std::move(handler)](const httplib::Request& req,
                                          httplib::Response& res) {
      const auto start = std::chrono::steady_clock::now();
      const HttpResponse r = handler(req);
      res.status = r.status;
      res.set_content(r.body, "application/json");
      Log(req.method, req.path, r.status,
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                    start)
              .count());
    };
  };
  server.Post("/v1/predict",
              route([svc](const httplib::Request& req) { return svc->Predict(req.body); }));
  server.Post("/v1/whatif",
              route([svc](const httplib::Request& req) { return svc->WhatIf(req.body); }));
  server.Get("/v1/model", route([svc](const httplib::Request&) { return svc->ModelInfo(); }));
  server.Get("/healthz", route([svc](const httplib::Request&) { return svc->Health(); }));
  server.Post("/v1/admin/reload",
              route([svc](const httplib::Request& req) { return svc->Reload(req.body); }));
  server.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  if (!static_dir.empty()) server.set_mount_point("/", static_dir.string());
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::Listen() { return impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace paxconnect::service
