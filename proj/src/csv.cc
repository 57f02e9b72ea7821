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

#include "paxconnect/csv.h"

#include "paxconnect/errors.h"

namespace paxconnect::csv {

std::optional<std::vector<std::string>> ReadRecord(std::istream& in,
                                                   std::string* raw) {
  std::string line;
  if (!std::getline(in, line)) return std::nullopt;
  if (raw) raw->clear();

  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_started_quoted = false;
  while (true) {
    const bool crlf = !line.empty() && line.back() == '\r';
    if (crlf) line.pop_back();
    if (raw) *raw += line;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char c = line[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < line.size() && line[i + 1] == '"') {
            field += '"';
            ++i;
          } else {
            in_quotes = false;
          }
        } else {
          field += c;
        }
      } else if (c == '"' && field.empty() && !field_started_quoted) {
        in_quotes = true;
        field_started_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_started_quoted = false;
      } else {
        field += c;
      }
    }
    if (!in_quotes) break;
    // Quoted field continues on the next physical line.
    if (crlf) field += '\r';
    field += '\n';
    if (raw) *raw += '\n';
    if (!std::getline(in, line)) {
      throw ParseError("unterminated quoted CSV field");
    }
  }
  fields.push_back(std::move(field));
  return fields;
}

std::string Escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(field);
  }
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void WriteRecord(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << Escape(fields[i]);
  }
  out << '\n';
}

}  // namespace paxconnect::csv
