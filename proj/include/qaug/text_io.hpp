//
// Copyright 2026 The qaug Authors
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
//

#ifndef QAUG_TEXT_IO_HPP_
#define QAUG_TEXT_IO_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace qaug {

struct TsvRow {
  std::size_t line = 0;  // 1-based line in the source file
  std::vector<std::string> fields;
};

// Reads a tab-separated table. Blank lines and lines starting with '#' are
// skipped. If the first kept row's first field equals header_first_field it
// is treated as a header and dropped.
std::vector<TsvRow> read_tsv(const std::filesystem::path& path,
                             std::string_view header_first_field = {});

std::vector<std::string> read_lines(const std::filesystem::path& path);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

std::vector<std::string> split(std::string_view s, char sep);
std::vector<std::string> split_whitespace(std::string_view s);
std::string_view trim(std::string_view s);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercases ASCII and the Latin-1 uppercase letters (À-Þ, e.g. Ñ, Á) of a
// UTF-8 string; other code points pass through untouched.
std::string utf8_lower(std::string_view s);

// Splits a UTF-8 string into code points (each returned as its byte string).
std::vector<std::string> utf8_chars(std::string_view s);

}  // namespace qaug

#endif  // QAUG_TEXT_IO_HPP_
