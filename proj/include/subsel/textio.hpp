// Copyright 2026 The subsel Authors
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

#ifndef SUBSEL_TEXTIO_HPP_
#define SUBSEL_TEXTIO_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace subsel {

// Metadata stamped at the top of every artifact file as '#' comment lines:
// tool version, the full parameter echo, and the seed. Deliberately no
// timestamps, so rerunning one command line reproduces the file byte for byte.
struct Meta {
  std::string args;
  std::optional<uint64_t> seed;
};

void write_meta_header(std::ostream& os, const Meta& meta);

inline bool is_comment_line(std::string_view line) {
  return !line.empty() && line[0] == '#';
}

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

bool try_parse_double(std::string_view s, double& out);
bool try_parse_int(std::string_view s, int64_t& out);
bool try_parse_u64(std::string_view s, uint64_t& out);

std::vector<std::string_view> split_tabs(std::string_view line);
std::vector<std::string_view> split_ws(std::string_view line);

// Backslash escaping for TSV fields that may carry tabs or newlines.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);

std::ifstream open_input(const std::filesystem::path& p);
std::ofstream open_output(const std::filesystem::path& p);

// Reads a whole line-oriented text file, normalizing "\r\n" endings.
std::vector<std::string> read_lines(const std::filesystem::path& p);

}  // namespace subsel

#endif  // SUBSEL_TEXTIO_HPP_
