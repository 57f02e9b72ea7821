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

#ifndef PAXCONNECT_DATASET_H_
#define PAXCONNECT_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "paxconnect/domain.h"

namespace paxconnect {

struct ColumnSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kNumeric;

  friend bool operator==(const ColumnSpec&, const ColumnSpec&) = default;
};

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  void AppendRow(std::span<const double> values);

  const std::vector<double>& data() const { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// One stage's view of the records before encoding. Categorical columns hold
// tokens, numeric columns hold numbers; the other vector of a column is empty.
struct RawColumn {
  ColumnSpec spec;
  std::vector<double> numbers;
  std::vector<std::string> tokens;
};

struct RawFrame {
  std::vector<RawColumn> columns;
  std::vector<std::uint8_t> labels;
  // Stable identifiers of the source records, used for leakage bookkeeping.
  std::vector<std::int64_t> row_ids;

  std::size_t num_rows() const { return labels.size(); }
  RawFrame Select(std::span<const std::size_t> rows) const;
};

// Builds the raw view of `features` for each record. Throws DataError when a
// required value is absent (run listwise deletion first). Row ids are the
// record positions plus `first_row_id`.
RawFrame BuildRawFrame(std::span<const ConnectionRecord> records,
                       std::span<const Feature> features,
                       std::int64_t first_row_id = 0);

// Encoded, model-ready data: column-major real values without NaN.
struct Dataset {
  std::vector<ColumnSpec> columns;
  std::vector<std::vector<double>> values;  // values[column][row]
  std::vector<std::uint8_t> labels;
  std::vector<std::int64_t> row_ids;

  std::size_t num_rows() const { return labels.size(); }
  std::size_t num_features() const { return columns.size(); }
  std::vector<double> Row(std::size_t r) const;
  void AppendRow(std::span<const double> row, std::uint8_t label,
                 std::int64_t row_id);
  Dataset Select(std::span<const std::size_t> rows) const;
  std::size_t CountPositives() const;
};

}  // namespace paxconnect

#endif  // PAXCONNECT_DATASET_H_
