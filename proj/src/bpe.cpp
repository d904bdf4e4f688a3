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

#include "subsel/bpe.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <unordered_set>

#include "subsel/error.hpp"
#include "subsel/version.hpp"

namespace subsel {

namespace {

// Adjacent token pair packed into one key. Token ids stay well under 2^31,
// and kBpeUnkToken packs to a value no merge table ever contains.
inline uint64_t pair_key(int32_t l, int32_t r) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(l)) << 32) |
         static_cast<uint64_t>(static_cast<uint32_t>(r));
}
inline int32_t key_left(uint64_t k) {
  return static_cast<int32_t>(static_cast<uint32_t>(k >> 32));
}
inline int32_t key_right(uint64_t k) {
  return static_cast<int32_t>(static_cast<uint32_t>(k));
}

// Overlapping adjacent-position counting: [1,1,1] holds two (1,1) pairs.
void count_pairs(const std::vector<int32_t>& seq,
                 std::map<uint64_t, int64_t>& counts) {
  for (size_t i = 0; i + 1 < seq.size(); ++i)
    ++counts[pair_key(seq[i], seq[i + 1])];
}

// One pass, leftmost occurrence first; [1,1,1] under merge (1,1) -> [t,1].
std::vector<int32_t> replace_pair(const std::vector<int32_t>& seq, int32_t l,
                                  int32_t r, int32_t merged) {
  std::vector<int32_t> out;
  out.reserve(seq.size());
  size_t i = 0;
  while (i < seq.size()) {
    if (i + 1 < seq.size() && seq[i] == l && seq[i + 1] == r) {
      out.push_back(merged);
      i += 2;
    } else {
      out.push_back(seq[i]);
      ++i;
    }
  }
  return out;
}

struct HeapEntry {
  int64_t count;
  uint64_t key;
};
// Max-heap on count; equal counts surface the lexicographically smallest
// (left id, right id) pair, which is the documented tie-break.
struct HeapLess {
  bool operator()(const HeapEntry& a, const HeapEntry& b) const {
    if (a.count != b.count) return a.count < b.count;
    return a.key > b.key;
  }
};

}  // namespace

void BpeModel::rebuild_tables() {
  unit_token.clear();
  unit_token.reserve(base_units.size());
  expansions.clear();
  expansions.reserve(base_units.size() + merges.size());
  for (size_t i = 0; i < base_units.size(); ++i) {
    if (i > 0 && base_units[i] <= base_units[i - 1])
      throw DataError("base units not strictly ascending");
    unit_token.emplace(base_units[i], static_cast<int32_t>(i));
    expansions.push_back({base_units[i]});
  }
  pair_rank.clear();
  pair_rank.reserve(merges.size());
  for (size_t m = 0; m < merges.size(); ++m) {
    const auto [l, r] = merges[m];
    const auto limit = static_cast<int32_t>(base_units.size() + m);
    if (l < 0 || l >= limit || r < 0 || r >= limit)
      throw DataError("merge " + std::to_string(m) +
                      " references a token that does not exist yet");
    pair_rank.emplace(pair_key(l, r), m);
    std::vector<int32_t> exp = expansions[static_cast<size_t>(l)];
    const auto& right = expansions[static_cast<size_t>(r)];
    exp.insert(exp.end(), right.begin(), right.end());
    expansions.push_back(std::move(exp));
  }
}

BpeModel bpe_train(const std::vector<std::vector<int32_t>>& sequences,
                   int32_t vocab_size, int32_t cluster_count) {
  if (sequences.empty()) throw DataError("bpe_train: empty corpus");
  if (cluster_count <= 0) throw DataError("bpe_train: cluster count must be positive");

  std::set<int32_t> base_set;
  for (const auto& seq : sequences) {
    for (int32_t unit : seq) {
      if (unit < 0 || unit >= cluster_count)
        throw DataError("bpe_train: unit " + std::to_string(unit) +
                        " outside [0, " + std::to_string(cluster_count) + ")");
      base_set.insert(unit);
    }
  }
  if (vocab_size < static_cast<int32_t>(base_set.size()))
    throw DataError("bpe_train: vocab_size " + std::to_string(vocab_size) +
                    " smaller than the " + std::to_string(base_set.size()) +
                    " distinct base units");

  BpeModel model;
  model.cluster_count = cluster_count;
  model.vocab_size_target = vocab_size;
  model.base_units.assign(base_set.begin(), base_set.end());
  model.rebuild_tables();

  // Working copies with units replaced by base token ids.
  std::vector<std::vector<int32_t>> work;
  work.reserve(sequences.size());
  for (const auto& seq : sequences) {
    std::vector<int32_t> mapped;
    mapped.reserve(seq.size());
    for (int32_t unit : seq) mapped.push_back(model.unit_token.at(unit));
    work.push_back(std::move(mapped));
  }

  // Global pair counts, postings (which sequences contain a pair) and a
  // lazily revalidated max-heap. Merges only ever lower the counts of
  // pre-existing pairs (new adjacencies always involve the new token), so a
  // stale heap entry can only overestimate and popping until the top entry
  // matches its live count yields the true maximum.
  std::map<uint64_t, int64_t> pair_count;
  std::unordered_map<uint64_t, std::unordered_set<size_t>> pair_seqs;
  for (size_t s = 0; s < work.size(); ++s) {
    std::map<uint64_t, int64_t> local;
    count_pairs(work[s], local);
    for (const auto& [key, n] : local) {
      pair_count[key] += n;
      pair_seqs[key].insert(s);
    }
  }

  std::priority_queue<HeapEntry, std::vector<HeapEntry>, HeapLess> heap;
  for (const auto& [key, n] : pair_count) {
    if (n >= 2) heap.push({n, key});
  }

  while (model.vocab_size() < vocab_size && !heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    const auto live_it = pair_count.find(top.key);
    const int64_t live = live_it == pair_count.end() ? 0 : live_it->second;
    if (live != top.count) {
      if (live >= 2) heap.push({live, top.key});
      continue;
    }
    if (top.count < 2) break;

    const int32_t l = key_left(top.key);
    const int32_t r = key_right(top.key);
    const int32_t merged = model.vocab_size();
    model.merges.emplace_back(l, r);

    std::vector<size_t> affected(pair_seqs[top.key].begin(),
                                 pair_seqs[top.key].end());
    std::sort(affected.begin(), affected.end());

    std::set<uint64_t> touched;
    for (size_t s : affected) {
      // Recounting the whole sequence before and after keeps overlap
      // arithmetic exact (e.g. merging (1,1) inside [1,1,1]).
      std::map<uint64_t, int64_t> before;
      count_pairs(work[s], before);
      work[s] = replace_pair(work[s], l, r, merged);
      std::map<uint64_t, int64_t> after;
      count_pairs(work[s], after);

      for (const auto& [key, n] : before) {
        const auto it = after.find(key);
        const int64_t now = it == after.end() ? 0 : it->second;
        if (now == n) continue;
        pair_count[key] += now - n;
        touched.insert(key);
        if (now == 0) pair_seqs[key].erase(s);
      }
      for (const auto& [key, n] : after) {
        if (before.count(key)) continue;
        pair_count[key] += n;
        pair_seqs[key].insert(s);
        touched.insert(key);
      }
    }

    for (uint64_t key : touched) {
      const auto it = pair_count.find(key);
      if (it != pair_count.end() && it->second >= 2)
        heap.push({it->second, key});
      else if (it != pair_count.end() && it->second <= 0)
        pair_count.erase(it);
    }
  }

  model.rebuild_tables();
  return model;
}

std::vector<int32_t> bpe_encode(const BpeModel& model,
                                std::span<const int32_t> rle_units) {
  std::vector<int32_t> tokens;
  tokens.reserve(rle_units.size());
  for (int32_t unit : rle_units) {
    const auto it = model.unit_token.find(unit);
    tokens.push_back(it == model.unit_token.end() ? kBpeUnkToken : it->second);
  }

  // Repeatedly apply the present pair with the lowest merge rank. A merge
  // can only create pairs involving its own new token, and those pairs rank
  // later, so this equals applying every merge in learned order.
  const auto& rank = model.pair_rank;
  const auto base = static_cast<int32_t>(model.base_units.size());
  const size_t no_rank = model.merges.size();
  while (tokens.size() > 1) {
    size_t best = no_rank;
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
      const auto it = rank.find(pair_key(tokens[i], tokens[i + 1]));
      if (it != rank.end() && it->second < best) best = it->second;
    }
    if (best == no_rank) break;
    const auto [l, r] = model.merges[best];
    tokens = replace_pair(tokens, l, r, base + static_cast<int32_t>(best));
  }
  return tokens;
}

std::vector<int32_t> bpe_decode(const BpeModel& model,
                                std::span<const int32_t> tokens) {
  std::vector<int32_t> units;
  for (int32_t tok : tokens) {
    if (tok == kBpeUnkToken)
      throw DataError("bpe_decode: UNK token has no expansion");
    if (tok < 0 || tok >= model.vocab_size())
      throw DataError("bpe_decode: unknown token id " + std::to_string(tok));
    const auto& exp = model.expansions[static_cast<size_t>(tok)];
    units.insert(units.end(), exp.begin(), exp.end());
  }
  return units;
}

void save_bpe_model(const BpeModel& model, const std::filesystem::path& path,
                    const Meta& meta) {
  std::ofstream out = open_output(path);
  write_meta_header(out, meta);
  out << "bpe_format 1\n";
  out << "cluster_count " << model.cluster_count << "\n";
  out << "vocab_size_target " << model.vocab_size_target << "\n";
  out << "tie_break smallest_pair\n";
  out << "base " << model.base_units.size() << "\n";
  for (int32_t unit : model.base_units) out << unit << "\n";
  out << "merges " << model.merges.size() << "\n";
  for (const auto& [l, r] : model.merges) out << l << ' ' << r << "\n";
  if (!out) throw DataError("failed writing " + path.string());
}

BpeModel load_bpe_model(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  size_t i = 0;
  const auto next_line = [&]() -> std::string_view {
    while (i < lines.size() && is_comment_line(lines[i])) ++i;
    if (i >= lines.size())
      throw DataError(path.string() + ": truncated BPE model file");
    return lines[i++];
  };
  const auto expect_kv = [&](std::string_view key) -> int64_t {
    const auto fields = split_ws(next_line());
    int64_t value = 0;
    if (fields.size() != 2 || fields[0] != key ||
        !try_parse_int(fields[1], value))
      throw DataError(path.string() + ": expected `" + std::string(key) +
                      " <n>` at line " + std::to_string(i));
    return value;
  };

  if (expect_kv("bpe_format") != 1)
    throw DataError(path.string() + ": unsupported BPE model format version");
  BpeModel model;
  model.cluster_count = static_cast<int32_t>(expect_kv("cluster_count"));
  model.vocab_size_target = static_cast<int32_t>(expect_kv("vocab_size_target"));
  const auto tie = split_ws(next_line());
  if (tie.size() != 2 || tie[0] != "tie_break" || tie[1] != "smallest_pair")
    throw DataError(path.string() + ": unknown tie-break rule");

  const int64_t n_base = expect_kv("base");
  for (int64_t b = 0; b < n_base; ++b) {
    int64_t unit = 0;
    if (!try_parse_int(next_line(), unit))
      throw DataError(path.string() + ": bad base unit at line " +
                      std::to_string(i));
    model.base_units.push_back(static_cast<int32_t>(unit));
  }
  const int64_t n_merges = expect_kv("merges");
  for (int64_t m = 0; m < n_merges; ++m) {
    const auto fields = split_ws(next_line());
    int64_t l = 0, r = 0;
    if (fields.size() != 2 || !try_parse_int(fields[0], l) ||
        !try_parse_int(fields[1], r))
      throw DataError(path.string() + ": bad merge at line " +
                      std::to_string(i));
    model.merges.emplace_back(static_cast<int32_t>(l), static_cast<int32_t>(r));
  }
  model.rebuild_tables();  // validates ordering and merge references
  return model;
}

}  // namespace subsel
