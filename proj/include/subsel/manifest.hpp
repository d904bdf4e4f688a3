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

#ifndef SUBSEL_MANIFEST_HPP_
#define SUBSEL_MANIFEST_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subsel/corpus.hpp"
#include "subsel/textio.hpp"

namespace subsel {

// Manifest: UTF-8 TSV with a required header row. Columns
//   id  duration_sec  speaker_id  gender  book_id  source_split  transcript
// where the last two are optional. Lines starting with '#' are metadata.
//
// Units file: `<id><TAB><space separated integers>`, one line per utterance.
// Score file: `<id><TAB><decimal score>`, one line per utterance.

CorpusPool load_manifest(const std::filesystem::path& manifest_path,
                         const std::optional<std::filesystem::path>& units_path,
                         int32_t cluster_count);

void save_manifest(const CorpusPool& pool,
                   const std::filesystem::path& manifest_path,
                   const std::optional<std::filesystem::path>& units_path,
                   const Meta& meta = {});

// Joins `score_path` onto the pool as scores[kind]. Ids present in the file
// but not in the pool are an error; pool utterances absent from the file are
// simply left unscored.
void attach_scores(CorpusPool& pool, const std::filesystem::path& score_path,
                   const std::string& kind);

std::vector<std::pair<std::string, double>> read_score_file(
    const std::filesystem::path& path);
void write_score_file(const std::filesystem::path& path,
                      const std::vector<std::pair<std::string, double>>& rows,
                      const Meta& meta = {});

std::vector<std::pair<std::string, std::vector<int32_t>>> read_units_file(
    const std::filesystem::path& path);
void write_units_file(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::vector<int32_t>>>& rows,
    const Meta& meta = {});

}  // namespace subsel

#endif  // SUBSEL_MANIFEST_HPP_
