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

#include "subsel/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace subsel {

Gender parse_gender(std::string_view s) {
  std::string lower;
  lower.reserve(s.size());
  for (char c : s) lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "m" || lower == "male") return Gender::kMale;
  if (lower == "f" || lower == "female") return Gender::kFemale;
  return Gender::kUnknown;
}

std::string_view gender_name(Gender g) {
  switch (g) {
    case Gender::kMale: return "male";
    case Gender::kFemale: return "female";
    case Gender::kUnknown: return "unknown";
  }
  return "unknown";
}

CorpusPool::CorpusPool(std::vector<Utterance> utterances, int32_t cluster_count)
    : utterances_(std::move(utterances)), cluster_count_(cluster_count) {
  if (cluster_count_ <= 0) throw DataError("cluster count must be positive");

  std::sort(utterances_.begin(), utterances_.end(),
            [](const Utterance& a, const Utterance& b) { return a.id < b.id; });

  index_.reserve(utterances_.size());
  double total = 0.0;
  for (size_t i = 0; i < utterances_.size(); ++i) {
    const Utterance& u = utterances_[i];
    if (u.id.empty()) throw DataError("empty utterance id");
    if (i > 0 && utterances_[i - 1].id == u.id)
      throw DataError("duplicate utterance id \"" + u.id + "\"");
    if (!(u.duration_sec > 0.0) || !std::isfinite(u.duration_sec))
      throw DataError("utterance \"" + u.id + "\" has non-positive duration");
    for (int32_t unit : u.units) {
      if (unit < 0 || unit >= cluster_count_)
        throw DataError("utterance \"" + u.id + "\" has unit " +
                        std::to_string(unit) + " outside [0, " +
                        std::to_string(cluster_count_) + ")");
    }
    index_.emplace(u.id, i);
    total += u.duration_sec;
  }
  total_duration_sec_ = total;
}

const Utterance* CorpusPool::find(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &utterances_[it->second];
}

const Utterance& CorpusPool::at(std::string_view id) const {
  const Utterance* u = find(id);
  if (u == nullptr) throw DataError("unknown utterance id \"" + std::string(id) + "\"");
  return *u;
}

Utterance& CorpusPool::mutable_at(std::string_view id) {
  const auto it = index_.find(std::string(id));
  if (it == index_.end())
    throw DataError("unknown utterance id \"" + std::string(id) + "\"");
  return utterances_[it->second];
}

}  // namespace subsel
