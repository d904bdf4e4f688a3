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

#ifndef SUBSEL_RLE_HPP_
#define SUBSEL_RLE_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace subsel {

// Collapses consecutive repetitions, keeping one element per run. Run
// lengths are discarded on purpose; only the deduplicated label sequence
// feeds the tokenizer.
inline std::vector<int32_t> rle_collapse(std::span<const int32_t> seq) {
  std::vector<int32_t> out;
  out.reserve(seq.size());
  for (size_t i = 0; i < seq.size(); ++i) {
    if (out.empty() || out.back() != seq[i]) out.push_back(seq[i]);
  }
  return out;
}

}  // namespace subsel

#endif  // SUBSEL_RLE_HPP_
