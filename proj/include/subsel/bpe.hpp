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

#ifndef SUBSEL_BPE_HPP_
#define SUBSEL_BPE_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "subsel/textio.hpp"

namespace subsel {

// Reserved id emitted for units that were never seen in training. It is not
// part of the token table and cannot be decoded.
inline constexpr int32_t kBpeUnkToken = -1;

// Byte-pair model over cluster-unit sequences. Token ids are dense:
// 0 .. |base_units|-1 name the base units in ascending unit order, and merge
// i creates token id |base_units| + i. Each utterance is one indivisible
// symbol sequence; there are no word boundaries and merges never cross
// sequence ends.
struct BpeModel {
  int32_t cluster_count = 0;
  int32_t vocab_size_target = 0;
  std::vector<int32_t> base_units;                  // ascending unit ids
  std::vector<std::pair<int32_t, int32_t>> merges;  // token-id pairs, in learned order

  // Derived lookup tables; rebuilt by rebuild_tables() after deserializing.
  std::vector<std::vector<int32_t>> expansions;     // token id -> base units
  std::unordered_map<int32_t, int32_t> unit_token;  // unit id -> base token id
  std::unordered_map<uint64_t, size_t> pair_rank;   // packed pair -> merge index

  int32_t vocab_size() const {
    return static_cast<int32_t>(base_units.size() + merges.size());
  }
  void rebuild_tables();
};

// Standard BPE training: repeatedly merge the most frequent adjacent token
// pair, counted over all sequences, until the token count reaches
// `vocab_size` or the best pair occurs fewer than 2 times. Equal-frequency
// ties go to the lexicographically smallest (left id, right id) pair, which
// makes the learned merge list a pure function of the corpus.
BpeModel bpe_train(const std::vector<std::vector<int32_t>>& sequences,
                   int32_t vocab_size, int32_t cluster_count);

// Applies merges in learned order, leftmost first within a rank. Units
// missing from the base vocabulary come out as kBpeUnkToken.
std::vector<int32_t> bpe_encode(const BpeModel& model,
                                std::span<const int32_t> rle_units);

// Concatenates each token's base-unit expansion. Inverse of bpe_encode on
// UNK-free input.
std::vector<int32_t> bpe_decode(const BpeModel& model,
                                std::span<const int32_t> tokens);

void save_bpe_model(const BpeModel& model, const std::filesystem::path& path,
                    const Meta& meta = {});
BpeModel load_bpe_model(const std::filesystem::path& path);

}  // namespace subsel

#endif  // SUBSEL_BPE_HPP_
