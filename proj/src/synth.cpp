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

#include "subsel/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "subsel/error.hpp"
#include "subsel/rng.hpp"
#include "subsel/textio.hpp"

namespace subsel {

namespace {

std::string zero_pad(const char* prefix, int64_t value, int width) {
  std::string digits = std::to_string(value);
  std::string out(prefix);
  for (int i = static_cast<int>(digits.size()); i < width; ++i) out += '0';
  return out + digits;
}

void validate(const SynthConfig& c) {
  const auto require = [](bool ok, const char* msg) {
    if (!ok) throw DataError(std::string("synth config: ") + msg);
  };
  require(c.n_speakers >= 1, "n_speakers must be >= 1");
  require(c.n_books >= 1, "n_books must be >= 1");
  require(c.n_utts >= 1, "n_utts must be >= 1");
  require(c.word_vocab_size >= 1, "word_vocab_size must be >= 1");
  require(c.words_per_book >= 1, "words_per_book must be >= 1");
  require(c.words_per_book <= c.word_vocab_size,
          "words_per_book cannot exceed word_vocab_size");
  require(c.units_per_word_min >= 1, "units_per_word_min must be >= 1");
  require(c.units_per_word_max >= c.units_per_word_min,
          "units_per_word range is empty");
  require(c.unit_noise_prob >= 0.0 && c.unit_noise_prob < 1.0,
          "unit_noise_prob must lie in [0, 1)");
  require(c.unit_noise_prob == 0.0 || c.cluster_count >= 2,
          "noise flips need at least 2 cluster units");
  require(c.duration_jitter_sec >= 0.0, "duration jitter must be >= 0");
  require(c.duration_mean_sec > c.duration_jitter_sec,
          "duration mean must exceed the jitter");
  require(c.gender_split >= 0.0 && c.gender_split <= 1.0,
          "gender_split must lie in [0, 1]");
  require(c.core_vocab_fraction >= 0.0 && c.core_vocab_fraction <= 1.0,
          "core_vocab_fraction must lie in [0, 1]");
  require(c.core_token_prob >= 0.0 && c.core_token_prob <= 1.0,
          "core_token_prob must lie in [0, 1]");
  require(c.core_cluster_fraction >= 0.0 && c.core_cluster_fraction <= 1.0,
          "core_cluster_fraction must lie in [0, 1]");
  require(c.book_zipf >= 0.0, "book_zipf must be >= 0");
  require(c.core_token_prob - 0.5 * c.core_prob_span >= 0.0 &&
              c.core_token_prob + 0.5 * c.core_prob_span <= 1.0,
          "core_token_prob +/- core_prob_span/2 must stay in [0, 1]");
  require(c.cluster_count >= 1, "cluster_count must be >= 1");
  require(c.books_per_speaker >= 1 && c.books_per_speaker <= c.n_books,
          "books_per_speaker must lie in [1, n_books]");
  require(c.max_unit_repeat >= 1, "max_unit_repeat must be >= 1");
  require(c.words_per_sec > 0.0, "words_per_sec must be positive");
}

// Deals books to speakers in consecutive blocks around a randomly permuted
// ring. Consecutive ring positions are distinct (books_per_speaker never
// exceeds n_books), and every book's speaker load lands within one slot of
// the average, so book-restricted sweeps cannot starve.
std::vector<std::vector<int32_t>> deal_books(const SynthConfig& c, Rng& rng) {
  std::vector<int32_t> ring(static_cast<size_t>(c.n_books));
  for (size_t i = 0; i < ring.size(); ++i) ring[i] = static_cast<int32_t>(i);
  rng.shuffle(ring);

  std::vector<int32_t> speaker_order(static_cast<size_t>(c.n_speakers));
  for (size_t i = 0; i < speaker_order.size(); ++i)
    speaker_order[i] = static_cast<int32_t>(i);
  rng.shuffle(speaker_order);

  std::vector<std::vector<int32_t>> assigned(static_cast<size_t>(c.n_speakers));
  int64_t cursor = 0;
  for (int32_t s : speaker_order) {
    auto& mine = assigned[static_cast<size_t>(s)];
    mine.reserve(static_cast<size_t>(c.books_per_speaker));
    for (int32_t j = 0; j < c.books_per_speaker; ++j) {
      mine.push_back(ring[static_cast<size_t>(cursor % c.n_books)]);
      ++cursor;
    }
  }
  return assigned;
}

}  // namespace

SynthConfig standard_synth_config(uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  return c;
}

SynthConfig stress_synth_config(uint64_t seed) {
  SynthConfig c;
  c.seed = seed;
  c.n_speakers = 96;
  c.n_books = 64;
  c.n_utts = 48000;
  c.word_vocab_size = 2000;
  c.words_per_book = 100;
  c.duration_mean_sec = 10.0;
  c.duration_jitter_sec = 4.0;
  return c;
}

SynthCorpus generate_corpus(const SynthConfig& config) {
  validate(config);

  // Independent streams per phase, so tweaking one phase's parameters never
  // shifts the randomness of the others.
  Rng rng_lex(derive_seed(config.seed, 1));
  Rng rng_books(derive_seed(config.seed, 2));
  Rng rng_speakers(derive_seed(config.seed, 3));
  Rng rng_utts(derive_seed(config.seed, 4));
  Rng rng_units(derive_seed(config.seed, 5));

  SynthCorpus corpus;

  // Pronunciation lexicon: every word owns a fixed unit sequence. Word ids
  // below core_count are the shared core and spell themselves with the
  // reserved low slice of the alphabet; the rest use the remaining units.
  const auto core_count = static_cast<int32_t>(std::llround(
      config.core_vocab_fraction * static_cast<double>(config.words_per_book)));
  const auto core_clusters = static_cast<int32_t>(std::clamp<int64_t>(
      std::llround(config.core_cluster_fraction *
                   static_cast<double>(config.cluster_count)),
      1, config.cluster_count));
  std::vector<std::string> words;
  std::vector<std::vector<int32_t>> word_units;
  words.reserve(static_cast<size_t>(config.word_vocab_size));
  for (int32_t w = 0; w < config.word_vocab_size; ++w) {
    words.push_back(zero_pad("w", w, 4));
    const bool is_core = w < core_count;
    int32_t lo = is_core ? 0 : core_clusters;
    int32_t hi = is_core ? core_clusters : config.cluster_count;
    if (lo >= hi) {
      lo = 0;
      hi = config.cluster_count;
    }
    // Core words take the configured length and compress into frequent
    // multi-unit tokens; specific words are single rare units, so each
    // remains one improbable event under any tokenization.
    const auto len = static_cast<size_t>(
        is_core ? rng_lex.next_int(config.units_per_word_min,
                                   config.units_per_word_max)
                : 1);
    std::vector<int32_t> units;
    units.reserve(len);
    for (size_t i = 0; i < len; ++i)
      units.push_back(lo + static_cast<int32_t>(rng_lex.next_below(
                               static_cast<uint64_t>(hi - lo))));
    corpus.lexicon.emplace(words.back(), units);
    word_units.push_back(std::move(units));
  }

  // Core words behave like function words: every word owns a small fixed set
  // of preferred core successors, shared across books, so core transitions
  // are dense and genuinely learnable while book-specific words stay
  // context-free surprises.
  const int32_t succ_count = std::min<int32_t>(3, core_count);
  std::vector<std::vector<int32_t>> successors(
      static_cast<size_t>(config.word_vocab_size));
  if (succ_count > 0) {
    for (auto& succ : successors) {
      while (static_cast<int32_t>(succ.size()) < succ_count) {
        const auto pick = static_cast<int32_t>(
            rng_lex.next_below(static_cast<uint64_t>(core_count)));
        if (std::find(succ.begin(), succ.end(), pick) == succ.end())
          succ.push_back(pick);
      }
    }
  }

  // Book vocabularies: the core plus book-specific draws from the rest.
  const int32_t specific_count = config.words_per_book - core_count;
  std::vector<std::vector<int32_t>> book_specific(
      static_cast<size_t>(config.n_books));
  for (auto& chosen : book_specific) {
    std::vector<int32_t> order(
        static_cast<size_t>(config.word_vocab_size - core_count));
    for (size_t i = 0; i < order.size(); ++i)
      order[i] = core_count + static_cast<int32_t>(i);
    rng_books.shuffle(order);
    chosen.assign(order.begin(), order.begin() + specific_count);
  }

  // Speakers: gender mix hits the configured fraction exactly, and the
  // book assignment is load-balanced.
  const auto n_female = static_cast<int64_t>(std::llround(
      config.gender_split * static_cast<double>(config.n_speakers)));
  std::vector<Gender> genders(static_cast<size_t>(config.n_speakers),
                              Gender::kMale);
  for (int64_t i = 0; i < n_female; ++i) genders[static_cast<size_t>(i)] = Gender::kFemale;
  rng_speakers.shuffle(genders);

  std::vector<std::string> splits(static_cast<size_t>(config.n_speakers),
                                  "other");
  for (size_t i = 0; i < splits.size() / 2; ++i) splits[i] = "clean";
  rng_speakers.shuffle(splits);

  const std::vector<std::vector<int32_t>> speaker_books =
      deal_books(config, rng_speakers);

  // Zipf popularity over books. A speaker splits their utterances across
  // their dealt books in proportion to these weights, so low-numbered books
  // dominate the pool while every dealt book keeps a nonzero share.
  std::vector<double> book_weight(static_cast<size_t>(config.n_books));
  std::vector<double> book_core_prob(static_cast<size_t>(config.n_books));
  for (size_t b = 0; b < book_weight.size(); ++b) {
    book_weight[b] = std::pow(static_cast<double>(b + 1), -config.book_zipf);
    const double rank =
        config.n_books > 1
            ? static_cast<double>(b) / static_cast<double>(config.n_books - 1)
            : 0.5;
    book_core_prob[b] =
        config.core_token_prob + config.core_prob_span * (0.5 - rank);
  }

  // Utterances.
  std::vector<Utterance> utts;
  utts.reserve(static_cast<size_t>(config.n_utts));
  for (int32_t i = 0; i < config.n_utts; ++i) {
    const auto speaker = static_cast<size_t>(
        rng_utts.next_below(static_cast<uint64_t>(config.n_speakers)));
    const auto& readable = speaker_books[speaker];
    double total = 0.0;
    for (int32_t b : readable) total += book_weight[static_cast<size_t>(b)];
    double roll = rng_utts.next_unit() * total;
    int32_t book = readable.back();
    for (int32_t b : readable) {
      roll -= book_weight[static_cast<size_t>(b)];
      if (roll <= 0.0) {
        book = b;
        break;
      }
    }

    Utterance u;
    u.id = zero_pad("utt", i, 6);
    u.speaker_id = zero_pad("spk", static_cast<int64_t>(speaker), 3);
    u.gender = genders[speaker];
    u.book_id = zero_pad("book", book, 3);
    u.source_split = splits[speaker];
    u.duration_sec = config.duration_mean_sec +
                     (2.0 * rng_utts.next_unit() - 1.0) * config.duration_jitter_sec;

    const auto n_words = std::max<int64_t>(
        1, std::llround(u.duration_sec * config.words_per_sec));
    std::string transcript;
    std::vector<int32_t> units;
    const auto& specific = book_specific[static_cast<size_t>(book)];
    int32_t prev_word = -1;
    for (int64_t w = 0; w < n_words; ++w) {
      const bool from_core =
          core_count > 0 &&
          (specific.empty() ||
           rng_utts.next_bernoulli(book_core_prob[static_cast<size_t>(book)]));
      int32_t word;
      if (from_core) {
        // A core word usually follows its predecessor's preferred successors,
        // so core transitions repeat often enough for an n-gram to learn.
        const std::vector<int32_t>* succ =
            prev_word >= 0 ? &successors[static_cast<size_t>(prev_word)]
                           : nullptr;
        if (succ != nullptr && !succ->empty() &&
            rng_utts.next_bernoulli(0.9)) {
          word =
              (*succ)[static_cast<size_t>(rng_utts.next_below(succ->size()))];
        } else {
          word = static_cast<int32_t>(
              rng_utts.next_below(static_cast<uint64_t>(core_count)));
        }
      } else {
        word = specific[static_cast<size_t>(
            rng_utts.next_below(specific.size()))];
      }
      prev_word = word;
      if (!transcript.empty()) transcript += ' ';
      transcript += words[static_cast<size_t>(word)];
      for (int32_t unit : word_units[static_cast<size_t>(word)]) {
        const int64_t repeats = rng_units.next_int(1, config.max_unit_repeat);
        for (int64_t rep = 0; rep < repeats; ++rep) {
          int32_t emitted = unit;
          if (config.unit_noise_prob > 0.0 &&
              rng_units.next_bernoulli(config.unit_noise_prob)) {
            // Flip to a different unit, uniformly over the other K-1.
            emitted = static_cast<int32_t>(
                (static_cast<uint64_t>(unit) + 1 +
                 rng_units.next_below(
                     static_cast<uint64_t>(config.cluster_count) - 1)) %
                static_cast<uint64_t>(config.cluster_count));
          }
          units.push_back(emitted);
        }
      }
    }
    u.transcript = std::move(transcript);
    u.units = std::move(units);
    utts.push_back(std::move(u));
  }

  corpus.pool = CorpusPool(std::move(utts), config.cluster_count);
  return corpus;
}

double proxy_quality(const CorpusPool& pool,
                     const std::vector<std::string>& subset_ids) {
  std::set<std::string> pool_words;
  for (const Utterance& u : pool.utterances()) {
    if (!u.transcript)
      throw DataError("utterance \"" + u.id + "\" has no transcript");
    for (std::string_view w : split_ws(*u.transcript)) {
      std::string folded;
      folded.reserve(w.size());
      for (char ch : w)
        folded += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      pool_words.insert(std::move(folded));
    }
  }
  if (pool_words.empty()) throw DataError("pool transcripts contain no words");
  if (subset_ids.empty()) return 0.0;

  std::set<std::string> subset_words;
  for (const std::string& id : subset_ids) {
    const Utterance& u = pool.at(id);
    internal_check(u.transcript.has_value(), "pool passed transcript check");
    for (std::string_view w : split_ws(*u.transcript)) {
      std::string folded;
      folded.reserve(w.size());
      for (char ch : w)
        folded += static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      subset_words.insert(std::move(folded));
    }
  }
  return static_cast<double>(subset_words.size()) /
         static_cast<double>(pool_words.size());
}

}  // namespace subsel
