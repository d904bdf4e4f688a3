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

#ifndef SUBSEL_SCORING_HPP_
#define SUBSEL_SCORING_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "subsel/bpe.hpp"
#include "subsel/corpus.hpp"
#include "subsel/ngram_lm.hpp"

namespace subsel {

// Score kinds are namespaced so several tables can coexist on one pool.
inline constexpr const char* kScorePpl = "ppl";
inline constexpr const char* kScoreMaskedLoss = "masked_loss";
inline constexpr const char* kScoreUnmaskedLoss = "unmasked_loss";
inline constexpr const char* kScoreCombinedLoss = "combined_loss";
inline constexpr const char* kScoreDuration = "duration";
inline constexpr const char* kScoreUnkRate = "unk_rate";

struct ScoreTable {
  std::string kind;
  std::map<std::string, double> entries;  // utterance id -> score
  std::string provenance;                 // human-readable "how computed"
};

struct PbpeOptions {
  int32_t bpe_vocab_size = 5000;
  int32_t lm_order = 3;
  bool include_eos = true;
};

struct PbpeArtifacts {
  BpeModel bpe;
  NGramLm lm;
};

// Fits the unit tokenizer and the token LM on the pool's own collapsed unit
// sequences. Training deliberately uses the full unlabeled pool; the scores
// then rank utterances by how typical their unit structure is.
PbpeArtifacts fit_pbpe(const CorpusPool& pool, const PbpeOptions& options);

// entries[id] = perplexity of the BPE-encoded collapsed unit sequence.
// When unk_rate_out is given it receives the fraction of encoded tokens that
// fell outside the tokenizer vocabulary, a cheap degeneracy alarm.
// Throws DataError for an utterance without units.
// workers > 1 scores utterances on a thread pool; results are keyed by id,
// so the table is identical for any worker count.
ScoreTable score_pbpe(const CorpusPool& pool, const BpeModel& bpe,
                      const NGramLm& lm, ScoreTable* unk_rate_out = nullptr,
                      int32_t workers = 1);

// Weighted pre-training loss: alpha * masked + (1 - alpha) * unmasked.
double combine_pretrain_loss(double masked, double unmasked, double alpha);

ScoreTable combine_pretrain_loss_tables(const ScoreTable& masked,
                                        const ScoreTable& unmasked,
                                        double alpha);

// entries[id] = duration_sec; lets the percentile machinery rank by length.
ScoreTable score_duration(const CorpusPool& pool);

// Count-based percentile regions over (score, id) ascending order.
// head = lowest floor(p*n) utterances, tail = highest floor(p*n), middle =
// 1-based sorted ranks floor((0.5 - p/2)*n) + 1 .. floor((0.5 + p/2)*n).
// Ties are broken by ascending id, so membership is deterministic.
enum class Region { kHead, kMiddle, kTail };
const char* region_name(Region r);

// Returns member ids in ascending id order. Every pool utterance must be
// scored; p must lie in (0, 1].
std::vector<std::string> percentile_partition(const ScoreTable& table,
                                              const CorpusPool& pool,
                                              Region region, double p);

// Copies table entries onto the pool as scores[table.kind].
void attach_score_table(CorpusPool& pool, const ScoreTable& table);

}  // namespace subsel

#endif  // SUBSEL_SCORING_HPP_
