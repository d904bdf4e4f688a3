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

#ifndef SUBSEL_SYNTH_HPP_
#define SUBSEL_SYNTH_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "subsel/corpus.hpp"

namespace subsel {

// Synthetic corpus with known speaker/book/vocabulary structure, so that
// selection and scoring behavior can be checked against ground truth.
//
// Generative story: every word owns a fixed short unit sequence (a toy
// pronunciation lexicon). Books carry restricted vocabularies, speakers read
// a couple of books, and an utterance draws words from one book. Each emitted
// unit is repeated a small random number of times (drawn per occurrence, so
// collapsing runs is non-trivial) and individual frames flip to another unit
// with unit_noise_prob.
struct SynthConfig {
  uint64_t seed = 1;
  int32_t n_speakers = 32;
  int32_t n_books = 16;
  int32_t n_utts = 2400;
  int32_t word_vocab_size = 400;
  int32_t words_per_book = 60;   // topic-restricted vocabularies
  int32_t units_per_word_min = 3;
  int32_t units_per_word_max = 6;
  // Every book's vocabulary = a globally shared core plus book-specific words.
  // Core words act like function words: they dominate token mass, spell
  // multi-unit sequences from a reserved slice of the alphabet, and chain
  // through preferred successors, so they compress into frequent tokens with
  // predictable transitions. Book-specific words are single units from the
  // remaining slice drawn independently of context, so each stays one
  // improbable event under any tokenization. That asymmetry is what ties
  // unit perplexity to lexical diversity.
  double core_vocab_fraction = 2.0 / 3.0;  // of words_per_book, shared core
  double core_token_prob = 0.6;            // chance a word is a core word
  // Popular books lean on the core (everyday language), niche books on their
  // own terminology: book b's core chance is core_token_prob shifted by up to
  // +/- core_prob_span/2 linearly in popularity rank.
  double core_prob_span = 0.3;
  double core_cluster_fraction = 0.08;     // units reserved for core words
  // Book popularity follows a Zipf law with this exponent: low-numbered books
  // soak up utterance mass, so high-numbered books hold pool-rare vocabulary.
  // Selecting for coverage of rare books then raises both unique-word count
  // and unit perplexity together, as with natural read speech. Zero makes
  // books uniform. Speakers still visit every dealt book, so the rarest
  // book pair keeps enough audio for small fixed budgets.
  double book_zipf = 0.7;
  double unit_noise_prob = 0.002;    // in [0, 1)
  double duration_mean_sec = 6.0;    // uniform jitter around the mean
  double duration_jitter_sec = 3.0;
  double gender_split = 0.5;         // fraction of speakers that are female
  int32_t cluster_count = 500;       // unit alphabet size K
  int32_t books_per_speaker = 2;
  int32_t max_unit_repeat = 3;       // frames per unit drawn in [1, max]
  double words_per_sec = 1.8;
};

struct SynthCorpus {
  CorpusPool pool;  // transcripts and units populated
  std::map<std::string, std::vector<int32_t>> lexicon;  // word -> base units
};

// Deterministic under config.seed; book load is balanced so every book gets
// (nearly) the same number of speakers and criterion sweeps cannot starve.
// Throws DataError on inconsistent config values.
SynthCorpus generate_corpus(const SynthConfig& config);

// The defaults above, reseeded: a pool small enough for repeated trials.
SynthConfig standard_synth_config(uint64_t seed);

// A pool of >100 audio hours with enough speakers and books for the full
// criterion sweep at a 10 h budget.
SynthConfig stress_synth_config(uint64_t seed);

// Fraction of the pool's unique (case-folded) transcript words covered by
// the subset. Higher is better, analogous to lower downstream WER. Throws
// DataError when transcripts are missing.
double proxy_quality(const CorpusPool& pool,
                     const std::vector<std::string>& subset_ids);

}  // namespace subsel

#endif  // SUBSEL_SYNTH_HPP_
