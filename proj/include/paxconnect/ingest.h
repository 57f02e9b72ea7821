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

// CSV ingestion of pre-joined connection tables and listwise deletion.
//
// The canonical table layout is documented in docs/schema.md. Timestamps are
// integer minutes since the Unix epoch.

#ifndef PAXCONNECT_INGEST_H_
#define PAXCONNECT_INGEST_H_

#include <cstddef>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "paxconnect/domain.h"

namespace paxconnect {

// Column names of the canonical CSV layout, in file order.
const std::vector<std::string>& CanonicalColumns();

inline constexpr char kMissedColumn[] = "Missed";

// CSV columns needed to compute `features`, plus the label column.
std::vector<std::string> RequiredColumns(std::span<const Feature> features);

struct IngestResult {
  std::vector<ConnectionRecord> records;
  std::size_t rejected_rows = 0;
  // Set when at least one row was rejected.
  std::filesystem::path rejects_path;
};

// Parses a canonical CSV file. A missing required column raises SchemaError
// naming the column. Unparseable or out-of-range cells become missing
// values. Rows with the wrong field count, an unreadable label or a schedule
// running backwards are written to "<path>.rejects.csv" and skipped.
IngestResult IngestCsv(const std::filesystem::path& path,
                       std::span<const Feature> schema);

void WriteCsv(std::ostream& out, std::span<const ConnectionRecord> records);
void WriteCsv(const std::filesystem::path& path,
              std::span<const ConnectionRecord> records);

struct DeletionResult {
  std::vector<ConnectionRecord> kept;
  // Position of each kept record in the input.
  std::vector<std::size_t> kept_indices;
  std::size_t dropped = 0;
};

// Removes every record lacking a value for any of `required`. Order is
// preserved.
DeletionResult ListwiseDelete(std::span<const ConnectionRecord> records,
                              std::span<const Feature> required);

}  // namespace paxconnect

#endif  // PAXCONNECT_INGEST_H_
