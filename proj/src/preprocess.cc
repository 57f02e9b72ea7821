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

#include "paxconnect/preprocess.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "json.hpp"
#include "paxconnect/errors.h"

namespace paxconnect::preprocess {
namespace {

using nlohmann::json;

FeatureKind ParseKind(const std::string& text) {
  if (text == "numeric") return FeatureKind::kNumeric;
  if (text == "categorical") return FeatureKind::kCategorical;
  throw ParseError("unknown column kind \"" + text + "\"");
}

std::string KindName(FeatureKind kind) {
  return kind == FeatureKind::kNumeric ? "numeric" : "categorical";
}

}  // namespace

SplitIndices StratifiedSplit(std::span<const std::uint8_t> labels,
                             double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("test_fraction must be in (0, 1)");
  }
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < labels.size(); ++i) {
    by_class[labels[i] ? 1 : 0].push_back(i);
  }
  if (by_class[0].empty() || by_class[1].empty()) {
    throw DataError("stratified split needs both classes present");
  }
  std::mt19937_64 rng(seed);
  SplitIndices split;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    const auto n_test = static_cast<std::size_t>(
        std::lround(static_cast<double>(rows.size()) * test_fraction));
    split.test.insert(split.test.end(), rows.begin(), rows.begin() + n_test);
    split.train.insert(split.train.end(), rows.begin() + n_test, rows.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

TargetEncoder::TargetEncoder(double smoothing) : smoothing_(smoothing) {
  if (!(smoothing > 0.0)) throw ConfigError("target encoding smoothing must be > 0");
}

double TargetEncoder::Blend(double mean, double count, double prior,
                            double smoothing) {
  const double lambda = count / (count + smoothing);
  return lambda * mean + (1.0 - lambda) * prior;
}

void TargetEncoder::Fit(const RawFrame& train) {
  if (train.num_rows() == 0) throw DataError("target encoder: empty training set");
  std::size_t positives = 0;
  for (const auto label : train.labels) positives += label;
  prior_ = static_cast<double>(positives) / static_cast<double>(train.num_rows());

  columns_.clear();
  for (const auto& column : train.columns) {
    if (column.spec.kind != FeatureKind::kCategorical) continue;
    std::map<std::string, std::pair<std::size_t, std::size_t>> counts;
    for (std::size_t r = 0; r < column.tokens.size(); ++r) {
      auto& [n, pos] = counts[column.tokens[r]];
      ++n;
      pos += train.labels[r];
    }
    auto& levels = columns_[column.spec.name];
    for (const auto& [category, stat] : counts) {
      const double n = static_cast<double>(stat.first);
      levels[category] = {Blend(stat.second / n, n, prior_, smoothing_),
                          stat.first};
    }
  }
  fitted_ = true;
}

const std::map<std::string, TargetEncoder::Level>& TargetEncoder::levels(
    const std::string& column) const {
  if (!fitted_) throw StateError("target encoder used before Fit()");
  const auto it = columns_.find(column);
  if (it == columns_.end()) {
    throw SchemaError("target encoder has no column \"" + column + "\"");
  }
  return it->second;
}

double TargetEncoder::Encode(const std::string& column,
                             const std::string& category) const {
  const auto& column_levels = levels(column);
  const auto it = column_levels.find(category);
  return it == column_levels.end() ? prior_ : it->second.value;
}

json TargetEncoder::ToJson() const {
  if (!fitted_) throw StateError("target encoder used before Fit()");
  json out = {{"smoothing", smoothing_}, {"prior", prior_}};
  json columns = json::object();
  for (const auto& [name, levels] : columns_) {
    json entries = json::object();
    for (const auto& [category, level] : levels) {
      entries[category] = {{"value", level.value}, {"count", level.count}};
    }
    columns[name] = std::move(entries);
  }
  out["columns"] = std::move(columns);
  return out;
}

TargetEncoder TargetEncoder::FromJson(const json& in) {
  try {
    TargetEncoder encoder(in.at("smoothing").get<double>());
    encoder.prior_ = in.at("prior").get<double>();
    for (const auto& [name, levels] : in.at("columns").items()) {
      auto& out = encoder.columns_[name];
      for (const auto& [category, level] : levels.items()) {
        out[category] = {level.at("value").get<double>(),
                         level.at("count").get<std::size_t>()};
      }
    }
    encoder.fitted_ = true;
    return encoder;
  } catch (const json::exception& e) {
    throw ParseError(std::string("target encoder manifest: ") + e.what());
  }
}

void Standardizer::Fit(const RawFrame& train) {
  if (train.num_rows() == 0) throw DataError("standardizer: empty training set");
  columns_.clear();
  for (const auto& column : train.columns) {
    if (column.spec.kind != FeatureKind::kNumeric) continue;
    const double n = static_cast<double>(column.numbers.size());
    double mean = 0.0;
    for (const double v : column.numbers) mean += v;
    mean /= n;
    double var = 0.0;
    for (const double v : column.numbers) var += (v - mean) * (v - mean);
    var /= n;
    Stats stats{mean, std::sqrt(var), false};
    if (!(stats.sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
      stats.sd = 1.0;
      stats.constant = true;
    }
    columns_[column.spec.name] = stats;
  }
  fitted_ = true;
}

const Standardizer::Stats& Standardizer::stats(const std::string& column) const {
  if (!fitted_) throw StateError("standardizer used before Fit()");
  const auto it = columns_.find(column);
  if (it == columns_.end()) {
    throw SchemaError("standardizer has no column \"" + column + "\"");
  }
  return it->second;
}

double Standardizer::Transform(const std::string& column, double value) const {
  const auto& s = stats(column);
  if (s.constant) return 0.0;
  return (value - s.mean) / s.sd;
}

json Standardizer::ToJson() const {
  if (!fitted_) throw StateError("standardizer used before Fit()");
  json columns = json::object();
  for (const auto& [name, s] : columns_) {
    columns[name] = {{"mean", s.mean}, {"sd", s.sd}, {"constant", s.constant}};
  }
  return {{"columns", std::move(columns)}};
}

Standardizer Standardizer::FromJson(const json& in) {
  try {
    Standardizer standardizer;
    for (const auto& [name, s] : in.at("columns").items()) {
      standardizer.columns_[name] = {s.at("mean").get<double>(),
                                     s.at("sd").get<double>(),
                                     s.at("constant").get<bool>()};
    }
    standardizer.fitted_ = true;
    return standardizer;
  } catch (const json::exception& e) {
    throw ParseError(std::string("standardizer manifest: ") + e.what());
  }
}

void Preprocessor::Fit(const RawFrame& train) {
  columns_.clear();
  for (const auto& column : train.columns) columns_.push_back(column.spec);
  encoder_.Fit(train);
  standardizer_.Fit(train);
}

Dataset Preprocessor::Transform(const RawFrame& frame) const {
  if (!fitted()) throw StateError("preprocessor used before Fit()");
  if (frame.columns.size() != columns_.size()) {
    throw SchemaError("preprocessor: column count mismatch");
  }
  Dataset out;
  out.columns = columns_;
  out.values.resize(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& column = frame.columns[c];
    if (column.spec != columns_[c]) {
      throw SchemaError("preprocessor: expected column \"" + columns_[c].name +
                        "\", got \"" + column.spec.name + "\"");
    }
    auto& values = out.values[c];
    values.reserve(frame.num_rows());
    if (column.spec.kind == FeatureKind::kCategorical) {
      const auto& levels = encoder_.levels(column.spec.name);
      for (const auto& token : column.tokens) {
        const auto it = levels.find(token);
        values.push_back(it == levels.end() ? encoder_.prior() : it->second.value);
      }
    } else {
      for (const double v : column.numbers) {
        values.push_back(standardizer_.Transform(column.spec.name, v));
      }
    }
  }
  out.labels = frame.labels;
  out.row_ids = frame.row_ids;
  return out;
}

std::vector<double> Preprocessor::TransformRow(std::span<const RawValue> raw) const {
  if (!fitted()) throw StateError("preprocessor used before Fit()");
  if (raw.size() != columns_.size()) {
    throw SchemaError("preprocessor: row width mismatch");
  }
  std::vector<double> row(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const auto& spec = columns_[c];
    if (spec.kind == FeatureKind::kCategorical) {
      const auto* token = std::get_if<std::string>(&raw[c]);
      if (!token) throw SchemaError("\"" + spec.name + "\" must be a category");
      row[c] = encoder_.Encode(spec.name, *token);
    } else {
      const auto* number = std::get_if<double>(&raw[c]);
      if (!number) throw SchemaError("\"" + spec.name + "\" must be a number");
      row[c] = standardizer_.Transform(spec.name, *number);
    }
  }
  return row;
}

json Preprocessor::ToJson() const {
  json columns = json::array();
  for (const auto& spec : columns_) {
    columns.push_back({{"name", spec.name}, {"kind", KindName(spec.kind)}});
  }
  return {{"columns", std::move(columns)},
          {"target_encoder", encoder_.ToJson()},
          {"standardizer", standardizer_.ToJson()}};
}

Preprocessor Preprocessor::FromJson(const json& in) {
  try {
    Preprocessor out;
    for (const auto& column : in.at("columns")) {
      out.columns_.push_back({column.at("name").get<std::string>(),
                              ParseKind(column.at("kind").get<std::string>())});
    }
    out.encoder_ = TargetEncoder::FromJson(in.at("target_encoder"));
    out.standardizer_ = Standardizer::FromJson(in.at("standardizer"));
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("preprocess manifest: ") + e.what());
  }
}

}  // namespace paxconnect::preprocess
