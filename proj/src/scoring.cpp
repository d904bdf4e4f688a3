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

#include "subsel/scoring.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "subsel/error.hpp"
#include "subsel/rle.hpp"

namespace subsel {

const char* region_name(Region r) {
  switch (r) {
    case Region::kHead: return "head";
    case Region::kMiddle: return "middle";
    case Region::kTail: return "tail";
  }
  return "?";
}

PbpeArtifacts fit_pbpe(const CorpusPool& pool, const PbpeOptions& options) {
  std::vector<std::vector<int32_t>> collapsed;
  collapsed.reserve(pool.size());
  for (const Utterance& u : pool.utterances()) {
    if (u.units.empty())
      throw DataError("utterance \"" + u.id + "\" has no units");
    collapsed.push_back(rle_collapse(u.units));
  }

  PbpeArtifacts art;
  art.bpe = bpe_train(collapsed, options.bpe_vocab_size, pool.cluster_count());

  std::vector<std::vector<int32_t>> encoded;
  encoded.reserve(collapsed.size());
  for (const auto& seq : collapsed) encoded.push_back(bpe_encode(art.bpe, seq));

  NGramLm::Options lm_options;
  lm_options.order = options.lm_order;
  lm_options.include_eos = options.include_eos;
  art.lm = NGramLm::train(encoded, lm_options);
  return art;
}

ScoreTable score_pbpe(const CorpusPool& pool, const BpeModel& bpe,
                      const NGramLm& lm, ScoreTable* unk_rate_out,
                      int32_t workers) {
  if (workers < 1) throw UsageError("worker count must be >= 1");
  const std::vector<Utterance>& utts = pool.utterances();
  const size_t n = utts.size();
  std::vector<double> ppl(n, 0.0);
  std::vector<double> unk_rate(n, 0.0);

  // Work is handed out by atomic index and written back by index, so the
  // result cannot depend on thread scheduling.
  std::atomic<size_t> cursor{0};
  std::mutex failure_mutex;
  std::exception_ptr failure;
  const auto run = [&]() {
    try {
      for (size_t i = cursor.fetch_add(1); i < n; i = cursor.fetch_add(1)) {
        const Utterance& u = utts[i];
        if (u.units.empty())
          throw DataError("utterance \"" + u.id + "\" has no units");
        const std::vector<int32_t> tokens =
            bpe_encode(bpe, rle_collapse(u.units));
        ppl[i] = lm.perplexity(tokens);
        if (tokens.empty()) continue;
        const auto unk = std::count(tokens.begin(), tokens.end(), kBpeUnkToken);
        unk_rate[i] =
            static_cast<double>(unk) / static_cast<double>(tokens.size());
      }
    } catch (...) {
      const std::lock_guard<std::mutex> lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  const auto n_threads =
      std::min<size_t>(static_cast<size_t>(workers), std::max<size_t>(n, 1));
  if (n_threads <= 1) {
    run();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(n_threads);
    for (size_t t = 0; t < n_threads; ++t) threads.emplace_back(run);
    for (std::thread& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ScoreTable table;
  table.kind = kScorePpl;
  table.provenance = "perplexity of BPE-encoded collapsed cluster units";
  if (unk_rate_out != nullptr) {
    unk_rate_out->kind = kScoreUnkRate;
    unk_rate_out->provenance = "fraction of encoded tokens outside the BPE vocabulary";
    unk_rate_out->entries.clear();
  }
  for (size_t i = 0; i < n; ++i) {
    table.entries[utts[i].id] = ppl[i];
    if (unk_rate_out != nullptr) unk_rate_out->entries[utts[i].id] = unk_rate[i];
  }
  return table;
}

double combine_pretrain_loss(double masked, double unmasked, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw UsageError("alpha must lie in [0, 1]");
  return alpha * masked + (1.0 - alpha) * unmasked;
}

ScoreTable combine_pretrain_loss_tables(const ScoreTable& masked,
                                        const ScoreTable& unmasked,
                                        double alpha) {
  ScoreTable out;
  out.kind = kScoreCombinedLoss;
  out.provenance = "alpha * masked_loss + (1 - alpha) * unmasked_loss";
  for (const auto& [id, m] : masked.entries) {
    const auto it = unmasked.entries.find(id);
    if (it == unmasked.entries.end())
      throw DataError("id \"" + id + "\" has a masked loss but no unmasked loss");
    out.entries[id] = combine_pretrain_loss(m, it->second, alpha);
  }
  for (const auto& [id, _] : unmasked.entries) {
    if (!masked.entries.count(id))
      throw DataError("id \"" + id + "\" has an unmasked loss but no masked loss");
  }
  return out;
}

ScoreTable score_duration(const CorpusPool& pool) {
  ScoreTable table;
  table.kind = kScoreDuration;
  table.provenance = "utterance duration in seconds";
  for (const Utterance& u : pool.utterances())
    table.entries[u.id] = u.duration_sec;
  return table;
}

namespace {

// floor() with a nudge: p*n for decimal p is often one ulp under the exact
// product (0.15 * 20 = 2.999...96), and the count boundaries here are
// defined on exact arithmetic.
int64_t floor_count(double v) {
  return static_cast<int64_t>(std::floor(v + 1e-9));
}

}  // namespace

std::vector<std::string> percentile_partition(const ScoreTable& table,
                                              const CorpusPool& pool,
                                              Region region, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw UsageError("percentile p must lie in (0, 1]");

  std::vector<std::pair<double, std::string>> ranked;
  ranked.reserve(pool.size());
  for (const Utterance& u : pool.utterances()) {
    const auto it = table.entries.find(u.id);
    if (it == table.entries.end())
      throw DataError("utterance \"" + u.id + "\" is unscored");
    ranked.emplace_back(it->second, u.id);
  }
  std::sort(ranked.begin(), ranked.end());  // (score, id) ascending

  const auto n = static_cast<int64_t>(ranked.size());
  int64_t lo = 0, hi = 0;  // 0-based half-open rank range [lo, hi)
  switch (region) {
    case Region::kHead:
      lo = 0;
      hi = floor_count(p * static_cast<double>(n));
      break;
    case Region::kTail:
      hi = n;
      lo = n - floor_count(p * static_cast<double>(n));
      break;
    case Region::kMiddle:
      // 1-based closed rank range floor((0.5-p/2)n)+1 .. floor((0.5+p/2)n).
      lo = floor_count((0.5 - p / 2.0) * static_cast<double>(n));
      hi = floor_count((0.5 + p / 2.0) * static_cast<double>(n));
      break;
  }

  std::vector<std::string> ids;
  ids.reserve(static_cast<size_t>(std::max<int64_t>(0, hi - lo)));
  for (int64_t i = std::max<int64_t>(0, lo); i < std::min(hi, n); ++i)
    ids.push_back(ranked[static_cast<size_t>(i)].second);
  std::sort(ids.begin(), ids.end());
  return ids;
}

void attach_score_table(CorpusPool& pool, const ScoreTable& table) {
  for (const auto& [id, score] : table.entries)
    pool.mutable_at(id).scores[table.kind] = score;
}

}  // namespace subsel
