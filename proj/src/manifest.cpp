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

#include "subsel/manifest.hpp"

#include <cmath>
#include <set>
#include <unordered_set>

#include "subsel/error.hpp"

namespace subsel {

namespace {

const char* const kColumns[] = {"id",     "duration_sec", "speaker_id",
                                "gender", "book_id",      "source_split",
                                "transcript"};
constexpr size_t kRequiredColumns = 5;

[[noreturn]] void fail_line(const std::filesystem::path& path, size_t lineno,
                            const std::string& msg) {
  throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + msg);
}

}  // namespace

CorpusPool load_manifest(const std::filesystem::path& manifest_path,
                         const std::optional<std::filesystem::path>& units_path,
                         int32_t cluster_count) {
  const std::vector<std::string> lines = read_lines(manifest_path);

  size_t lineno = 0;
  size_t header_cols = 0;
  bool saw_header = false;
  std::vector<Utterance> utts;
  for (const std::string& line : lines) {
    ++lineno;
    if (is_comment_line(line)) continue;
    if (line.empty()) continue;
    const std::vector<std::string_view> fields = split_tabs(line);
    if (!saw_header) {
      // Header must name the fixed column order; the last two are optional.
      if (fields.size() < kRequiredColumns || fields.size() > 7)
        fail_line(manifest_path, lineno, "malformed header row");
      for (size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] != kColumns[i])
          fail_line(manifest_path, lineno,
                    "expected column \"" + std::string(kColumns[i]) +
                        "\", found \"" + std::string(fields[i]) + "\"");
      }
      header_cols = fields.size();
      saw_header = true;
      continue;
    }
    if (fields.size() != header_cols)
      fail_line(manifest_path, lineno,
                "expected " + std::to_string(header_cols) + " fields, found " +
                    std::to_string(fields.size()));
    Utterance u;
    u.id = std::string(fields[0]);
    if (u.id.empty()) fail_line(manifest_path, lineno, "empty id");
    if (!try_parse_double(fields[1], u.duration_sec))
      fail_line(manifest_path, lineno,
                "bad duration_sec \"" + std::string(fields[1]) + "\"");
    u.speaker_id = std::string(fields[2]);
    u.gender = parse_gender(fields[3]);
    u.book_id = std::string(fields[4]);
    if (header_cols > 5 && !fields[5].empty())
      u.source_split = std::string(fields[5]);
    if (header_cols > 6 && !fields[6].empty())
      u.transcript = unescape_field(fields[6]);
    utts.push_back(std::move(u));
  }
  if (!saw_header)
    throw DataError(manifest_path.string() + ": missing header row");

  if (units_path) {
    auto rows = read_units_file(*units_path);  // rejects duplicate ids
    std::unordered_map<std::string, std::vector<int32_t>*> by_id;
    by_id.reserve(rows.size());
    for (auto& [id, units] : rows) by_id.emplace(id, &units);
    std::unordered_set<std::string> manifest_ids;
    for (Utterance& u : utts) {
      manifest_ids.insert(u.id);
      const auto it = by_id.find(u.id);
      if (it == by_id.end())
        throw DataError(units_path->string() + ": no units for id \"" + u.id +
                        "\"");
      u.units = std::move(*it->second);
    }
    for (const auto& [id, units] : rows) {
      if (!manifest_ids.count(id))
        throw DataError(units_path->string() + ": units for unknown id \"" +
                        id + "\"");
    }
  }

  // The pool constructor re-checks ids, durations and unit ranges, so a
  // manifest assembled by hand gets the same validation as a loaded one.
  return CorpusPool(std::move(utts), cluster_count);
}

void save_manifest(const CorpusPool& pool,
                   const std::filesystem::path& manifest_path,
                   const std::optional<std::filesystem::path>& units_path,
                   const Meta& meta) {
  bool any_split = false;
  bool any_transcript = false;
  for (const Utterance& u : pool.utterances()) {
    any_split = any_split || u.source_split.has_value();
    any_transcript = any_transcript || u.transcript.has_value();
  }
  // Column positions are fixed, so the transcript column forces the
  // source_split column to exist even if every split field is empty.
  const bool write_split = any_split || any_transcript;

  std::ofstream out = open_output(manifest_path);
  write_meta_header(out, meta);
  out << "id\tduration_sec\tspeaker_id\tgender\tbook_id";
  if (write_split) out << "\tsource_split";
  if (any_transcript) out << "\ttranscript";
  out << "\n";
  for (const Utterance& u : pool.utterances()) {
    out << u.id << '\t' << format_double(u.duration_sec) << '\t' << u.speaker_id
        << '\t' << gender_name(u.gender) << '\t' << u.book_id;
    if (write_split) out << '\t' << (u.source_split ? *u.source_split : "");
    if (any_transcript)
      out << '\t' << (u.transcript ? escape_field(*u.transcript) : "");
    out << "\n";
  }
  if (!out) throw DataError("failed writing " + manifest_path.string());

  if (units_path) {
    std::vector<std::pair<std::string, std::vector<int32_t>>> rows;
    rows.reserve(pool.size());
    for (const Utterance& u : pool.utterances()) rows.emplace_back(u.id, u.units);
    write_units_file(*units_path, rows, meta);
  }
}

void attach_scores(CorpusPool& pool, const std::filesystem::path& score_path,
                   const std::string& kind) {
  for (const auto& [id, score] : read_score_file(score_path)) {
    pool.mutable_at(id).scores[kind] = score;
  }
}

std::vector<std::pair<std::string, double>> read_score_file(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, double>> rows;
  std::unordered_set<std::string> seen;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (is_comment_line(line) || line.empty()) continue;
    const std::vector<std::string_view> fields = split_tabs(line);
    if (fields.size() != 2)
      fail_line(path, lineno, "expected `id<TAB>score`");
    double score = 0.0;
    if (!try_parse_double(fields[1], score) || !std::isfinite(score))
      fail_line(path, lineno,
                "non-numeric score \"" + std::string(fields[1]) + "\"");
    std::string id(fields[0]);
    if (!seen.insert(id).second)
      fail_line(path, lineno, "duplicate score for id \"" + id + "\"");
    rows.emplace_back(std::move(id), score);
  }
  return rows;
}

void write_score_file(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, double>>& rows,
                      const Meta& meta) {
  std::ofstream out = open_output(path);
  write_meta_header(out, meta);
  for (const auto& [id, score] : rows)
    out << id << '\t' << format_double(score) << "\n";
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<std::pair<std::string, std::vector<int32_t>>> read_units_file(
    const std::filesystem::path& path) {
  std::vector<std::pair<std::string, std::vector<int32_t>>> rows;
  std::unordered_set<std::string> seen;
  size_t lineno = 0;
  for (const std::string& line : read_lines(path)) {
    ++lineno;
    if (is_comment_line(line) || line.empty()) continue;
    const std::vector<std::string_view> fields = split_tabs(line);
    if (fields.size() != 2)
      fail_line(path, lineno, "expected `id<TAB>space-separated units`");
    if (!seen.insert(std::string(fields[0])).second)
      fail_line(path, lineno,
                "duplicate units for id \"" + std::string(fields[0]) + "\"");
    std::vector<int32_t> units;
    for (std::string_view tok : split_ws(fields[1])) {
      int64_t v = 0;
      if (!try_parse_int(tok, v) || v < INT32_MIN || v > INT32_MAX)
        fail_line(path, lineno, "bad unit \"" + std::string(tok) + "\"");
      units.push_back(static_cast<int32_t>(v));
    }
    rows.emplace_back(std::string(fields[0]), std::move(units));
  }
  return rows;
}

void write_units_file(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::vector<int32_t>>>& rows,
    const Meta& meta) {
  std::ofstream out = open_output(path);
  write_meta_header(out, meta);
  for (const auto& [id, units] : rows) {
    out << id << '\t';
    for (size_t i = 0; i < units.size(); ++i) {
      if (i > 0) out << ' ';
      out << units[i];
    }
    out << "\n";
  }
  if (!out) throw DataError("failed writing " + path.string());
}

}  // namespace subsel
