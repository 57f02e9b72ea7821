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


// Prediction and explanation service for a loaded model bundle.
//
// Handlers take and return JSON bodies and are usable without a network
// listener; HttpServer binds them to routes:
//
//   POST /v1/predict        one raw feature map -> probability + SHAP
//   POST /v1/whatif         base feature map + perturbations -> one result each
//   GET  /v1/model          stage, feature schema, threshold, test metrics
//   GET  /healthz           liveness
//   POST /v1/admin/reload   swap in a bundle from disk
//
// Every request works on one immutable snapshot of the model; a reload swaps
// the snapshot atomically.

#ifndef PAXCONNECT_SERVICE_H_
#define PAXCONNECT_SERVICE_H_

#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>

#include "json.hpp"
#include "paxconnect/errors.h"
#include "paxconnect/pipeline.h"
#include "paxconnect/shap.h"

namespace paxconnect::service {

struct HttpResponse {
  int status = 200;
  std::string body;
};

// A request the service rejects; carries the HTTP status and the offending
// field, if any.
class RequestError : public Error {
 public:
  RequestError(int status, const std::string& message, std::string field = {})
      : Error(message), status_(status), field_(std::move(field)) {}

  int status() const { return status_; }
  const std::string& field() const { return field_; }

 private:
  int status_;
  std::string field_;
};

class LoadedModel {
 public:
  explicit LoadedModel(pipeline::Bundle bundle);
  LoadedModel(const LoadedModel&) = delete;
  LoadedModel& operator=(const LoadedModel&) = delete;

  const pipeline::Bundle& bundle() const { return bundle_; }
  const shap::Explainer& explainer() const { return explainer_; }

 private:
  pipeline::Bundle bundle_;
  shap::Explainer explainer_;
};

class Service {
 public:
  Service() = default;

  // Loads a bundle and makes it current. Throws on failure; the previous
  // snapshot stays in place.
  void Load(const std::filesystem::path& model_dir);
  void SetModel(std::shared_ptr<const LoadedModel> model);
  std::shared_ptr<const LoadedModel> snapshot() const;

  HttpResponse Predict(std::string_view body) const;
  HttpResponse WhatIf(std::string_view body) const;
  HttpResponse ModelInfo() const;
  HttpResponse Health() const;
  // Body may name {"model_dir": ...}; defaults to the last loaded directory.
  HttpResponse Reload(std::string_view body);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const LoadedModel> model_;
  std::filesystem::path model_dir_;
};

// Prediction for one raw feature map against `model`. Throws RequestError.
nlohmann::json PredictOne(const LoadedModel& model, const nlohmann::json& features,
                          double threshold);

class HttpServer {
 public:
  // `static_dir`, when set, is served under "/".
  explicit HttpServer(Service& service, std::filesystem::path static_dir = {});
  ~HttpServer();

  // Binds to `port` (0 picks a free one) and returns the bound port, or -1.
  int Bind(const std::string& host, int port);
  // Blocks until Stop().
  bool Listen();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace paxconnect::service

#endif  // PAXCONNECT_SERVICE_H_
