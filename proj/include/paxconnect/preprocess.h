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

// Train-only fitted transforms: stratified split, smoothed target encoding of
// categorical columns and standardization of numeric columns.

#ifndef PAXCONNECT_PREPROCESS_H_
#define PAXCONNECT_PREPROCESS_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "paxconnect/dataset.h"
#include "paxconnect/domain.h"

namespace paxconnect::preprocess {

struct SplitIndices {
  std::vector<std::size_t> train;  // ascending
  std::vector<std::size_t> test;   // ascending
};

// Per-class random split. The test set takes round(class_count *
// test_fraction) rows of each class. Throws DataError when only one class is
// present.
SplitIndices StratifiedSplit(std::span<const std::uint8_t> labels,
                             double test_fraction, std::uint64_t seed);

inline constexpr double kDefaultSmoothing = 20.0;

// Replaces a category c by lambda * mean_c + (1 - lambda) * prior with
// lambda = n_c / (n_c + m), where n_c and mean_c are the training count and
// positive rate of c and prior is the training positive rate. Unseen
// categories map to the prior.
class TargetEncoder {
 public:
  struct Level {
    double value = 0.0;
    std::size_t count = 0;
  };

  explicit TargetEncoder(double smoothing = kDefaultSmoothing);

  // Fits every categorical column of `train`.
  void Fit(const RawFrame& train);
  bool fitted() const { return fitted_; }

  double prior() const { return prior_; }
  double smoothing() const { return smoothing_; }
  // Encoded levels of a fitted column.
  const std::map<std::string, Level>& levels(const std::string& column) const;

  double Encode(const std::string& column, const std::string& category) const;

  // Closed form of the encoding for a level with `count` training rows and
  // positive rate `mean`.
  static double Blend(double mean, double count, double prior, double smoothing);

  nlohmann::json ToJson() const;
  static TargetEncoder FromJson(const nlohmann::json& json);

 private:
  double smoothing_;
  double prior_ = 0.0;
  bool fitted_ = false;
  std::map<std::string, std::map<std::string, Level>> columns_;
};

// (x - mean) / sd per numeric column, statistics from training rows only.
// A column with zero spread is flagged constant and transformed to zero.
class Standardizer {
 public:
  struct Stats {
    double mean = 0.0;
    double sd = 1.0;
    bool constant = false;
  };

  void Fit(const RawFrame& train);
  bool fitted() const { return fitted_; }
  const Stats& stats(const std::string& column) const;
  double Transform(const std::string& column, double value) const;

  nlohmann::json ToJson() const;
  static Standardizer FromJson(const nlohmann::json& json);

 private:
  bool fitted_ = false;
  std::map<std::string, Stats> columns_;
};

// The fitted preprocessing for one stage. Categorical columns are target
// encoded and left in [0, 1]; numeric columns are standardized.
class Preprocessor {
 public:
  explicit Preprocessor(double smoothing = kDefaultSmoothing)
      : encoder_(smoothing) {}

  void Fit(const RawFrame& train);
  bool fitted() const { return encoder_.fitted() && standardizer_.fitted(); }

  const std::vector<ColumnSpec>& columns() const { return columns_; }
  const TargetEncoder& encoder() const { return encoder_; }
  const Standardizer& standardizer() const { return standardizer_; }

  // Columns of `frame` must match the fitted columns by name and order.
  Dataset Transform(const RawFrame& frame) const;
  // One row given raw values in column order.
  std::vector<double> TransformRow(std::span<const RawValue> raw) const;

  nlohmann::json ToJson() const;
  static Preprocessor FromJson(const nlohmann::json& json);

 private:
  std::vector<ColumnSpec> columns_;
  TargetEncoder encoder_;
  Standardizer standardizer_;
};

}  // namespace paxconnect::preprocess

#endif  // PAXCONNECT_PREPROCESS_H_
