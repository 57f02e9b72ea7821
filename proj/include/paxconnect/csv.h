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

// Minimal RFC-4180 CSV reading and writing.

#ifndef PAXCONNECT_CSV_H_
#define PAXCONNECT_CSV_H_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace paxconnect::csv {

// Reads one record, honoring quoted fields that span lines. Returns nullopt
// at end of input. `raw` receives the record text as it appeared in the file.
// Throws ParseError on an unterminated quoted field.
std::optional<std::vector<std::string>> ReadRecord(std::istream& in,
                                                   std::string* raw = nullptr);

// Quotes a field when it contains a separator, a quote or a line break.
std::string Escape(std::string_view field);

void WriteRecord(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace paxconnect::csv

#endif  // PAXCONNECT_CSV_H_
