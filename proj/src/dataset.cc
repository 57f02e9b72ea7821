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

#include "paxconnect/dataset.h"

#include <string>
#include <variant>

#include "paxconnect/errors.h"

namespace paxconnect {

void Matrix::AppendRow(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) {
    throw DataError("Matrix::AppendRow: expected " + std::to_string(cols_) +
                    " values, got " + std::to_string(values.size()));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

RawFrame RawFrame::Select(std::span<const std::size_t> rows) const {
  RawFrame out;
  out.columns.reserve(columns.size());
  for (const auto& column : columns) {
    RawColumn selected{column.spec, {}, {}};
    if (column.spec.kind == FeatureKind::kNumeric) {
      selected.numbers.reserve(rows.size());
      for (const auto r : rows) selected.numbers.push_back(column.numbers[r]);
    } else {
      selected.tokens.reserve(rows.size());
      for (const auto r : rows) selected.tokens.push_back(column.tokens[r]);
    }
    out.columns.push_back(std::move(selected));
  }
  out.labels.reserve(rows.size());
  out.row_ids.reserve(rows.size());
  for (const auto r : rows) {
    out.labels.push_back(labels[r]);
    out.row_ids.push_back(row_ids[r]);
  }
  return out;
}

RawFrame BuildRawFrame(std::span<const ConnectionRecord> records,
                       std::span<const Feature> features,
                       std::int64_t first_row_id) {
  RawFrame frame;
  for (const auto feature : features) {
    RawColumn column;
    column.spec = {std::string(FeatureName(feature)), KindOf(feature)};
    if (column.spec.kind == FeatureKind::kNumeric) {
      column.numbers.reserve(records.size());
    } else {
      column.tokens.reserve(records.size());
    }
    frame.columns.push_back(std::move(column));
  }
  frame.labels.reserve(records.size());
  frame.row_ids.reserve(records.size());
  for (std::size_t r = 0; r < records.size(); ++r) {
    for (std::size_t c = 0; c < features.size(); ++c) {
      auto value = ExtractFeature(records[r], features[c]);
      if (!value) {
        throw DataError("record " + std::to_string(r) + " has no value for \"" +
                        std::string(FeatureName(features[c])) +
                        "\"; apply listwise deletion first");
      }
      auto& column = frame.columns[c];
      if (column.spec.kind == FeatureKind::kNumeric) {
        column.numbers.push_back(std::get<double>(*value));
      } else {
        column.tokens.push_back(std::get<std::string>(std::move(*value)));
      }
    }
    frame.labels.push_back(records[r].missed ? 1 : 0);
    frame.row_ids.push_back(first_row_id + static_cast<std::int64_t>(r));
  }
  return frame;
}

std::vector<double> Dataset::Row(std::size_t r) const {
  std::vector<double> row(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) row[c] = values[c][r];
  return row;
}

void Dataset::AppendRow(std::span<const double> row, std::uint8_t label,
                        std::int64_t row_id) {
  if (row.size() != columns.size()) {
    throw DataError("Dataset::AppendRow: width mismatch");
  }
  if (values.size() != columns.size()) values.resize(columns.size());
  for (std::size_t c = 0; c < row.size(); ++c) values[c].push_back(row[c]);
  labels.push_back(label);
  row_ids.push_back(row_id);
}

Dataset Dataset::Select(std::span<const std::size_t> rows) const {
  Dataset out;
  out.columns = columns;
  out.values.resize(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out.values[c].reserve(rows.size());
    for (const auto r : rows) out.values[c].push_back(values[c][r]);
  }
  out.labels.reserve(rows.size());
  out.row_ids.reserve(rows.size());
  for (const auto r : rows) {
    out.labels.push_back(labels[r]);
    out.row_ids.push_back(row_ids[r]);
  }
  return out;
}

std::size_t Dataset::CountPositives() const {
  std::size_t count = 0;
  for (const auto label : labels) count += label;
  return count;
}

}  // namespace paxconnect
