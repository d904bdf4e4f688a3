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

#ifndef SUBSEL_CORPUS_HPP_
#define SUBSEL_CORPUS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "subsel/error.hpp"

namespace subsel {

enum class Gender { kMale, kFemale, kUnknown };

// Accepts "m"/"male"/"f"/"female" case-insensitively; anything else,
// including an empty field, is unknown.
Gender parse_gender(std::string_view s);
std::string_view gender_name(Gender g);

// One audio item: metadata plus the frame-level cluster-label sequence.
// Transcripts are analysis-only and optional; scores are attached per kind.
struct Utterance {
  std::string id;
  double duration_sec = 0.0;
  std::string speaker_id;
  Gender gender = Gender::kUnknown;
  std::string book_id;
  std::optional<std::string> source_split;
  std::optional<std::string> transcript;
  std::vector<int32_t> units;
  std::map<std::string, double> scores;

  bool operator==(const Utterance&) const = default;
};

// The selection pool. Utterances are held sorted by id, so two pools built
// from the same rows in any order are identical and every downstream
// operation is independent of manifest line order.
class CorpusPool {
 public:
  CorpusPool() = default;

  // Validates ids (unique), durations (> 0) and unit ranges ([0, K)).
  CorpusPool(std::vector<Utterance> utterances, int32_t cluster_count);

  const std::vector<Utterance>& utterances() const { return utterances_; }
  int32_t cluster_count() const { return cluster_count_; }
  double total_duration_sec() const { return total_duration_sec_; }
  size_t size() const { return utterances_.size(); }

  const Utterance* find(std::string_view id) const;
  const Utterance& at(std::string_view id) const;
  Utterance& mutable_at(std::string_view id);

 private:
  std::vector<Utterance> utterances_;
  std::unordered_map<std::string, size_t> index_;
  int32_t cluster_count_ = 0;
  double total_duration_sec_ = 0.0;
};

}  // namespace subsel

#endif  // SUBSEL_CORPUS_HPP_
