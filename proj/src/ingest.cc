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

#include "paxconnect/ingest.h"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string_view>

#include "paxconnect/csv.h"
#include "paxconnect/errors.h"

namespace paxconnect {
namespace {

constexpr char kScheduledOnBlocks[] = "Scheduled On Blocks";
constexpr char kActualOnBlocks[] = "Actual On Blocks";
constexpr char kScheduledOffBlocks[] = "Scheduled Off Blocks";
constexpr char kActualOffBlocks[] = "Actual Off Blocks";

std::string_view Trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  return text;
}

template <typename T>
std::optional<T> ParseInteger(std::string_view text) {
  text = Trim(text);
  if (text.empty()) return std::nullopt;
  T value{};
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<bool> ParseBool(std::string_view text) {
  text = Trim(text);
  if (text == "1" || text == "true" || text == "True" || text == "TRUE") {
    return true;
  }
  if (text == "0" || text == "false" || text == "False" || text == "FALSE") {
    return false;
  }
  return std::nullopt;
}

std::optional<int> InRange(std::optional<int> value, int lo, int hi) {
  if (value && (*value < lo || *value > hi)) return std::nullopt;
  return value;
}

std::optional<std::string> Token(std::string_view text) {
  text = Trim(text);
  if (text.empty()) return std::nullopt;
  return std::string(text);
}

std::string Field(const std::optional<std::string>& value) {
  return value ? *value : std::string();
}

template <typename T>
std::string Field(const std::optional<T>& value) {
  return value ? std::to_string(*value) : std::string();
}

std::string Field(const std::optional<bool>& value) {
  if (!value) return {};
  return *value ? "1" : "0";
}

}  // namespace

const std::vector<std::string>& CanonicalColumns() {
  static const std::vector<std::string> columns = {
      "TP From",       "TP To",          "Traffic Network",
      "Dep. Day",      "Dep. Month Day", kScheduledOnBlocks,
      kActualOnBlocks, kScheduledOffBlocks, kActualOffBlocks,
      "Sex",           "Age",            "Is Group",
      "Class From",    "Class To",       "Boarding Delta",
      "N Bus",         kMissedColumn,
  };
  return columns;
}

std::vector<std::string> RequiredColumns(std::span<const Feature> features) {
  std::vector<std::string> required;
  auto add = [&](std::string name) {
    for (const auto& existing : required) {
      if (existing == name) return;
    }
    required.push_back(std::move(name));
  };
  for (const auto feature : features) {
    switch (feature) {
      case Feature::kSchConnTime:
        add(kScheduledOnBlocks);
        add(kScheduledOffBlocks);
        break;
      case Feature::kPerceivedConnTime:
        add(kActualOnBlocks);
        add(kScheduledOffBlocks);
        break;
      case Feature::kActualConnTime:
        add(kActualOnBlocks);
        add(kActualOffBlocks);
        break;
      default:
        add(std::string(FeatureName(feature)));
    }
  }
  add(kMissedColumn);
  return required;
}

IngestResult IngestCsv(const std::filesystem::path& path,
                       std::span<const Feature> schema) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());

  const auto header = csv::ReadRecord(in);
  if (!header) throw SchemaError(path.string() + ": empty file, no header row");
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < header->size(); ++i) {
    index.emplace(std::string(Trim((*header)[i])), i);
  }
  for (const auto& column : RequiredColumns(schema)) {
    if (!index.contains(column)) {
      throw SchemaError(path.string() + ": missing required column \"" +
                        column + "\"");
    }
  }

  IngestResult result;
  std::vector<std::vector<std::string>> rejects;
  auto cell = [&](const std::vector<std::string>& row,
                  std::string_view column) -> std::string_view {
    const auto it = index.find(column);
    if (it == index.end()) return {};
    return row[it->second];
  };

  std::string raw;
  std::size_t line = 1;
  while (auto row = csv::ReadRecord(in, &raw)) {
    ++line;
    if (row->size() == 1 && Trim((*row)[0]).empty()) continue;
    if (row->size() != header->size()) {
      rejects.push_back({std::to_string(line),
                         "expected " + std::to_string(header->size()) +
                             " fields, got " + std::to_string(row->size()),
                         raw});
      continue;
    }
    const auto missed = ParseBool(cell(*row, kMissedColumn));
    if (!missed) {
      rejects.push_back({std::to_string(line), "unreadable Missed label", raw});
      continue;
    }

    ConnectionRecord record;
    record.missed = *missed;
    record.arrival_flight = Token(cell(*row, "TP From"));
    record.departure_flight = Token(cell(*row, "TP To"));
    if (const auto network = ParseTrafficNetwork(Trim(cell(*row, "Traffic Network")))) {
      const auto [origin, destination] = SchengenFlags(*network);
      record.origin_schengen = origin;
      record.destination_schengen = destination;
    }
    record.departure_weekday = InRange(ParseInteger<int>(cell(*row, "Dep. Day")), 0, 6);
    record.departure_month_day =
        InRange(ParseInteger<int>(cell(*row, "Dep. Month Day")), 1, 31);
    record.scheduled_on_blocks = ParseInteger<Minutes>(cell(*row, kScheduledOnBlocks));
    record.actual_on_blocks = ParseInteger<Minutes>(cell(*row, kActualOnBlocks));
    record.scheduled_off_blocks = ParseInteger<Minutes>(cell(*row, kScheduledOffBlocks));
    record.actual_off_blocks = ParseInteger<Minutes>(cell(*row, kActualOffBlocks));
    const auto sex_text = Trim(cell(*row, "Sex"));
    if (!sex_text.empty()) record.sex = ParseSex(sex_text);
    record.age = InRange(ParseInteger<int>(cell(*row, "Age")), 0, 120);
    record.is_group = ParseBool(cell(*row, "Is Group"));
    record.class_from = Token(cell(*row, "Class From"));
    record.class_to = Token(cell(*row, "Class To"));
    record.boarding_delta =
        InRange(ParseInteger<int>(cell(*row, "Boarding Delta")), 0, 1 << 20);
    record.n_bus = InRange(ParseInteger<int>(cell(*row, "N Bus")), 0, 1 << 20);

    if (record.scheduled_on_blocks && record.scheduled_off_blocks &&
        *record.scheduled_off_blocks < *record.scheduled_on_blocks) {
      rejects.push_back({std::to_string(line),
                         "scheduled off-blocks precedes scheduled on-blocks",
                         raw});
      continue;
    }
    result.records.push_back(std::move(record));
  }

  result.rejected_rows = rejects.size();
  if (!rejects.empty()) {
    result.rejects_path = path;
    result.rejects_path += ".rejects.csv";
    std::ofstream out(result.rejects_path);
    csv::WriteRecord(out, {"line", "reason", "record"});
    for (const auto& reject : rejects) csv::WriteRecord(out, reject);
  }
  return result;
}

void WriteCsv(std::ostream& out, std::span<const ConnectionRecord> records) {
  csv::WriteRecord(out, CanonicalColumns());
  for (const auto& r : records) {
    const auto network = r.traffic_network();
    csv::WriteRecord(
        out, {Field(r.arrival_flight), Field(r.departure_flight),
              network ? std::string(TrafficNetworkName(*network)) : "",
              Field(r.departure_weekday), Field(r.departure_month_day),
              Field(r.scheduled_on_blocks), Field(r.actual_on_blocks),
              Field(r.scheduled_off_blocks), Field(r.actual_off_blocks),
              r.sex ? std::string(SexName(*r.sex)) : "", Field(r.age),
              Field(r.is_group), Field(r.class_from), Field(r.class_to),
              Field(r.boarding_delta), Field(r.n_bus), r.missed ? "1" : "0"});
  }
}

void WriteCsv(const std::filesystem::path& path,
              std::span<const ConnectionRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  WriteCsv(out, records);
}

DeletionResult ListwiseDelete(std::span<const ConnectionRecord> records,
                              std::span<const Feature> required) {
  DeletionResult result;
  for (std::size_t i = 0; i < records.size(); ++i) {
    bool complete = true;
    for (const auto feature : required) {
      if (!ExtractFeature(records[i], feature)) {
        complete = false;
        break;
      }
    }
    if (complete) {
      result.kept.push_back(records[i]);
      result.kept_indices.push_back(i);
    } else {
      ++result.dropped;
    }
  }
  return result;
}

}  // namespace paxconnect
