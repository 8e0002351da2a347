// Copyright 2026 The provaudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace provaudit {

/// Lower-case hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and renames, so readers never see a torn file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Splits on '\n'. A trailing newline does not produce an empty last line.
std::vector<std::string> split_lines(std::string_view text);
std::string join_lines(const std::vector<std::string>& lines, bool trailing_newline);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);
bool is_ident_char(char c);

/// Case-insensitive whole-word search; word characters are [A-Za-z0-9_].
bool contains_word(std::string_view haystack, std::string_view word, bool case_insensitive);

/// Filesystem-safe slug: lower-case alphanumerics joined by '_'.
std::string slugify(std::string_view s);

/// Fixed-point decimal formatting without locale influence.
std::string format_fixed(double value, int decimals);

/// UTC timestamp, ISO-8601 with seconds.
std::string utc_timestamp();

}  // namespace provaudit
