// Copyright 2026 The TIER Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TIER_CSV_HPP_
#define TIER_CSV_HPP_

// Minimal RFC 4180 reader/writer plus small file helpers shared by the
// manifest, history and report formats.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tier::csv {

using Row = std::vector<std::string>;

// Parses the whole document. Quoted fields may contain commas, quotes ("")
// and newlines. Accepts LF and CRLF line ends; a trailing newline does not
// produce an empty row. Throws ValidationError on an unterminated quote.
std::vector<Row> parse(std::string_view text);

std::string format_row(const Row& row);

// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

// Strict decimal parse of a whole field; nullopt-like failure is reported
// by throwing ValidationError with `context` in the message.
double parse_double(std::string_view field, std::string_view context);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace tier::csv

#endif  // TIER_CSV_HPP_
