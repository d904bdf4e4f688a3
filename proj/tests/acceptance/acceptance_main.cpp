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
//
// Release gate: seven end-to-end checks, one line of output each. Exits
// nonzero if any check fails. Runtime limits are part of the pass condition
// where stated.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "subsel/analysis.hpp"
#include "subsel/bpe.hpp"
#include "subsel/corpus.hpp"
#include "subsel/manifest.hpp"
#include "subsel/ngram_lm.hpp"
#include "subsel/rle.hpp"
#include "subsel/rng.hpp"
#include "subsel/scoring.hpp"
#include "subsel/selection.hpp"
#include "subsel/synth.hpp"

namespace fs = std::filesystem;
using namespace subsel;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(int index, const char* name, bool pass, double elapsed_sec,
            const std::string& detail) {
  std::printf("[%d/7] %s: %s (%.2f s)%s%s\n", index, name,
              pass ? "PASS" : "FAIL", elapsed_sec, detail.empty() ? "" : " ",
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

// ---------------------------------------------------------------------------
// 1. Published WER table: recompute every relative reduction, require the
// test-other columns to reproduce within 0.01 pp, and require the checker to
// flag exactly the two test-clean entries that do not survive recomputation.

struct StatedRow {
  const char* label;
  double baseline;
  double wer;
  double stated;
  bool is_other;
};

void check_werr_table() {
  const auto start = Clock::now();

  // Candidate WERs: full-pool baseline 9.61/4.48, random subset 9.00/4.24,
  // then the three unsupervised subsets.
  const std::vector<StatedRow> rows = {
      {"other_full_vs_full", 9.61, 9.61, 0.00, true},
      {"other_ppl_vs_full", 9.61, 8.93, 7.08, true},
      {"other_spk_vs_full", 9.61, 8.89, 7.49, true},
      {"other_book_vs_full", 9.61, 8.8, 8.43, true},
      {"other_full_vs_rand", 9.00, 9.61, -6.78, true},
      {"other_ppl_vs_rand", 9.00, 8.93, 0.78, true},
      {"other_spk_vs_rand", 9.00, 8.89, 1.22, true},
      {"other_book_vs_rand", 9.00, 8.8, 2.22, true},
      {"clean_full_vs_full", 4.48, 4.48, 0.00, false},
      {"clean_ppl_vs_full", 4.48, 4.25, 5.05, false},
      {"clean_spk_vs_full", 4.48, 4.06, 9.38, false},
      {"clean_book_vs_full", 4.48, 4.21, 6.03, false},
      {"clean_full_vs_rand", 4.24, 4.48, -5.66, false},
      {"clean_ppl_vs_rand", 4.24, 4.25, -0.32, false},
      {"clean_spk_vs_rand", 4.24, 4.06, 4.25, false},
      {"clean_book_vs_rand", 4.24, 4.21, 0.71, false},
  };

  int other_bad = 0;
  std::set<std::string> flagged;
  double ppl_clean_recomputed = 0.0;
  for (const StatedRow& row : rows) {
    const double recomputed = werr_percent(row.baseline, row.wer);
    if (row.is_other && std::abs(recomputed - row.stated) > 0.01) ++other_bad;
    const WerrCheckRow checked =
        check_werr(row.label, row.baseline, row.wer, row.stated);
    if (checked.flagged) flagged.insert(row.label);
    if (std::string(row.label) == "clean_ppl_vs_full")
      ppl_clean_recomputed = recomputed;
  }

  const std::set<std::string> expect_flagged = {"clean_ppl_vs_full",
                                                "clean_ppl_vs_rand"};
  const double elapsed = seconds_since(start);
  const bool pass = other_bad == 0 && flagged == expect_flagged &&
                    std::abs(ppl_clean_recomputed - 5.13) < 0.01 &&
                    elapsed < 1.0;

  char detail[160];
  std::snprintf(detail, sizeof detail,
                "test-other rows off by >0.01pp: %d; flagged: %zu of 16 "
                "(clean ppl recomputes to %.4f)",
                other_bad, flagged.size(), ppl_clean_recomputed);
  report(1, "werr-table-check", pass, elapsed, detail);
}

// ---------------------------------------------------------------------------
// 2. Incremental BPE trainer against a from-scratch reference.

std::vector<std::pair<int32_t, int32_t>> reference_bpe_merges(
    const std::vector<std::vector<int32_t>>& sequences, int32_t vocab_size) {
  std::set<int32_t> base_set;
  for (const auto& s : sequences) base_set.insert(s.begin(), s.end());
  std::map<int32_t, int32_t> to_token;
  int32_t next = 0;
  for (const int32_t u : base_set) to_token[u] = next++;

  std::vector<std::vector<int32_t>> work;
  for (const auto& s : sequences) {
    std::vector<int32_t> w;
    for (const int32_t u : s) w.push_back(to_token[u]);
    work.push_back(std::move(w));
  }

  std::vector<std::pair<int32_t, int32_t>> merges;
  while (next < vocab_size) {
    std::map<std::pair<int32_t, int32_t>, int64_t> counts;
    for (const auto& w : work)
      for (size_t i = 0; i + 1 < w.size(); ++i) ++counts[{w[i], w[i + 1]}];
    std::pair<int32_t, int32_t> best{-1, -1};
    int64_t best_count = 1;  // strict > keeps the smallest pair on ties
    for (const auto& [pair, c] : counts)
      if (c > best_count) {
        best = pair;
        best_count = c;
      }
    if (best.first < 0) break;
    merges.push_back(best);
    for (auto& w : work) {
      std::vector<int32_t> out;
      for (size_t i = 0; i < w.size();) {
        if (i + 1 < w.size() && w[i] == best.first && w[i + 1] == best.second) {
          out.push_back(next);
          i += 2;
        } else {
          out.push_back(w[i++]);
        }
      }
      w = std::move(out);
    }
    ++next;
  }
  return merges;
}

void check_bpe_reference() {
  const auto start = Clock::now();
  Rng rng(90210);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto base = static_cast<int32_t>(2 + rng.next_below(19));  // <= 20
    std::vector<std::vector<int32_t>> corpus(1 + rng.next_below(50));
    for (auto& s : corpus) {
      const uint64_t len = 1 + rng.next_below(80);
      for (uint64_t i = 0; i < len; ++i)
        s.push_back(static_cast<int32_t>(rng.next_below(base)));
    }
    const auto vocab = static_cast<int32_t>(
        base + rng.next_below(static_cast<uint64_t>(64 - base + 1)));
    const BpeModel model = bpe_train(corpus, vocab, base);
    if (model.merges != reference_bpe_merges(corpus, vocab)) ++mismatches;
  }
  const double elapsed = seconds_since(start);
  const bool pass = mismatches == 0 && elapsed < 30.0;
  report(2, "bpe-reference-equivalence", pass, elapsed,
         "mismatching corpora: " + std::to_string(mismatches) + " of 100");
}

// ---------------------------------------------------------------------------
// 3. Language model arithmetic.

void check_lm_correctness() {
  const auto start = Clock::now();
  int bad = 0;

  // Normalization: 100 random contexts across two smoothed models.
  Rng rng(555);
  for (int m = 0; m < 2; ++m) {
    NGramLm::Options opt;
    opt.order = 3;
    opt.include_eos = m == 0;
    std::vector<std::vector<int32_t>> corpus(10);
    for (auto& s : corpus) {
      const uint64_t len = 1 + rng.next_below(40);
      for (uint64_t i = 0; i < len; ++i)
        s.push_back(static_cast<int32_t>(rng.next_below(6)));
    }
    // The support is the observed token set plus one unseen probe (the whole
    // UNK share); summing unobserved values would count UNK twice.
    std::set<int32_t> observed;
    for (const auto& s : corpus) observed.insert(s.begin(), s.end());
    const NGramLm lm = NGramLm::train(corpus, opt);
    for (int c = 0; c < 50; ++c) {
      std::vector<int32_t> ctx;
      const uint64_t len = rng.next_below(4);
      for (uint64_t i = 0; i < len; ++i)
        ctx.push_back(static_cast<int32_t>(rng.next_below(8)));
      double sum = lm.cond_prob(ctx, 1 << 20);  // any unseen token: UNK share
      for (int32_t v : observed) sum += lm.cond_prob(ctx, v);
      if (opt.include_eos) sum += lm.cond_prob(ctx, NGramLm::kEosEvent);
      if (std::abs(sum - 1.0) > 1e-9) ++bad;
    }
  }

  // Uniform unigram: perplexity equals the vocabulary size exactly.
  NGramLm::Options uni;
  uni.order = 1;
  uni.include_eos = false;
  uni.smoothing = NGramLm::Smoothing::kMle;
  const NGramLm uniform = NGramLm::train({{0}, {1}, {2}, {3}, {4}}, uni);
  const std::vector<int32_t> probe{0, 2, 4, 1};
  if (uniform.perplexity(probe) != 5.0) ++bad;

  // Hand-worked Witten-Bell bigram on the two-sequence toy corpus.
  NGramLm::Options opt;
  opt.order = 2;
  const NGramLm toy = NGramLm::train({{7, 9}, {7, 9}}, opt);
  const std::vector<int32_t> seq{7, 9};
  const double expect = 83.0 / 108.0;
  const int32_t ctx7[] = {7};
  const int32_t ctx9[] = {9};
  if (std::abs(toy.cond_prob({}, 7) - expect) > 1e-9) ++bad;
  if (std::abs(toy.cond_prob({ctx7, 1}, 9) - expect) > 1e-9) ++bad;
  if (std::abs(toy.cond_prob({ctx9, 1}, NGramLm::kEosEvent) - expect) > 1e-9)
    ++bad;
  if (std::abs(toy.perplexity(seq) - 108.0 / 83.0) > 1e-9) ++bad;

  const double elapsed = seconds_since(start);
  report(3, "lm-correctness", bad == 0, elapsed,
         "failed checks: " + std::to_string(bad));
}

// ---------------------------------------------------------------------------
// 4. Selection invariants on a ~100 h synthetic pool, every criterion, 50
// seeds, zero tolerance.

struct CriterionCase {
  SelectionSpec spec;
  const std::set<std::string>* eligible = nullptr;  // null: whole pool
  bool female_only = false;
  std::optional<int32_t> max_speakers;
  std::optional<int32_t> max_books;
};

void check_selection_contracts() {
  const auto start = Clock::now();

  SynthConfig cfg = stress_synth_config(7);
  cfg.n_utts = 36000;  // ~100 h at the 10 s mean duration
  const SynthCorpus synth = generate_corpus(cfg);
  const CorpusPool& pool = synth.pool;

  ScoreTable scores = score_duration(pool);
  scores.kind = kScorePpl;  // distinct continuous values, deterministic

  const auto to_set = [](const std::vector<std::string>& v) {
    return std::set<std::string>(v.begin(), v.end());
  };
  const ScoreTable durations = score_duration(pool);
  const auto dur_head =
      to_set(percentile_partition(durations, pool, Region::kHead, 0.15));
  const auto dur_tail =
      to_set(percentile_partition(durations, pool, Region::kTail, 0.15));
  const auto dur_mid =
      to_set(percentile_partition(durations, pool, Region::kMiddle, 0.4));
  const auto score_head =
      to_set(percentile_partition(scores, pool, Region::kHead, 0.15));
  const auto score_tail =
      to_set(percentile_partition(scores, pool, Region::kTail, 0.15));
  const auto score_mid =
      to_set(percentile_partition(scores, pool, Region::kMiddle, 0.4));

  const double budget = 8.0 * 3600.0;
  std::vector<CriterionCase> cases;
  const auto add = [&](Criterion c) -> CriterionCase& {
    CriterionCase cc;
    cc.spec.criterion = c;
    cc.spec.budget_sec = budget;
    cases.push_back(cc);
    return cases.back();
  };
  add(Criterion::kPureRandom);
  {
    auto& cc = add(Criterion::kGenderRestricted);
    cc.spec.num_speakers = 24;
    cc.female_only = true;
    cc.max_speakers = 24;
  }
  add(Criterion::kDurationTailLong).eligible = &dur_tail;
  add(Criterion::kDurationTailShort).eligible = &dur_head;
  add(Criterion::kDurationMiddle).eligible = &dur_mid;
  {
    auto& cc = add(Criterion::kSpeakerDiverse);
    cc.spec.num_speakers = 24;
    cc.max_speakers = 24;
  }
  {
    auto& cc = add(Criterion::kBookDiverse);
    cc.spec.num_books = 16;
    cc.max_books = 16;
  }
  add(Criterion::kScoreHead).eligible = &score_head;
  add(Criterion::kScoreTail).eligible = &score_tail;
  add(Criterion::kScoreMiddle).eligible = &score_mid;
  add(Criterion::kScoreTailSpeakerStrat).eligible = &score_tail;
  add(Criterion::kScoreTailBookStrat).eligible = &score_tail;

  long violations = 0;
  long subsets_checked = 0;
  for (CriterionCase& cc : cases) {
    for (uint64_t seed = 0; seed < 50; ++seed) {
      cc.spec.seed = seed;
      const SubsetResult r = select_subset(pool, cc.spec, &scores);
      const SubsetResult again = select_subset(pool, cc.spec, &scores);
      ++subsets_checked;

      if (again.utterance_ids != r.utterance_ids) ++violations;
      if (r.total_duration_sec < budget) ++violations;
      if (!r.utterance_ids.empty()) {
        const double last = pool.at(r.utterance_ids.back()).duration_sec;
        if (r.total_duration_sec - last >= budget) ++violations;
      }
      std::set<std::string> speakers;
      std::set<std::string> books;
      std::set<std::string> seen_ids;
      for (const std::string& id : r.utterance_ids) {
        const Utterance& u = pool.at(id);
        if (!seen_ids.insert(id).second) ++violations;
        if (cc.eligible != nullptr && cc.eligible->count(id) == 0) ++violations;
        if (cc.female_only && u.gender != Gender::kFemale) ++violations;
        speakers.insert(u.speaker_id);
        books.insert(u.book_id);
      }
      if (cc.max_speakers &&
          speakers.size() > static_cast<size_t>(*cc.max_speakers))
        ++violations;
      if (cc.max_books && books.size() > static_cast<size_t>(*cc.max_books))
        ++violations;
    }
  }

  const double elapsed = seconds_since(start);
  const bool pass = violations == 0 && elapsed < 120.0;
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "%ld violations over %ld subsets (pool %.1f h)", violations,
                subsets_checked, pool.total_duration_sec() / 3600.0);
  report(4, "selection-contracts", pass, elapsed, detail);
}

// ---------------------------------------------------------------------------
// 5. Across 16 differently selected subsets, average unit perplexity must
// track unique-word count: positive correlation (> 0.3) and tail beating
// head on unique words, each in at least 90% of 50 trials.

struct SubsetSlot {
  Criterion criterion;
  std::optional<int32_t> num_speakers;
  std::optional<int32_t> num_books;
};

void check_ppl_unique_word_link() {
  const auto start = Clock::now();

  const std::vector<SubsetSlot> slots = {
      {Criterion::kPureRandom, {}, {}},
      {Criterion::kPureRandom, {}, {}},
      {Criterion::kDurationTailLong, {}, {}},
      {Criterion::kDurationTailShort, {}, {}},
      {Criterion::kDurationMiddle, {}, {}},
      {Criterion::kSpeakerDiverse, 4, {}},
      {Criterion::kSpeakerDiverse, 8, {}},
      {Criterion::kSpeakerDiverse, 16, {}},
      {Criterion::kBookDiverse, {}, 2},
      {Criterion::kBookDiverse, {}, 4},
      {Criterion::kBookDiverse, {}, 8},
      {Criterion::kScoreHead, {}, {}},
      {Criterion::kScoreTail, {}, {}},
      {Criterion::kScoreMiddle, {}, {}},
      {Criterion::kScoreTailSpeakerStrat, {}, {}},
      {Criterion::kScoreTailBookStrat, {}, {}},
  };
  const size_t head_slot = 11;
  const size_t tail_slot = 12;

  const int trials = 50;
  int corr_hits = 0;
  int tail_hits = 0;
  double r_sum = 0.0;
  for (int t = 0; t < trials; ++t) {
    const uint64_t pool_seed = 1000 + static_cast<uint64_t>(t);
    SynthCorpus synth = generate_corpus(standard_synth_config(pool_seed));
    CorpusPool& pool = synth.pool;

    PbpeOptions opt;
    // Vocab just above full word coverage keeps surplus merges from packing
    // frequent word pairs into single tokens; bigram scoring keeps every LM
    // context dense enough that the pool-trained model generalizes instead
    // of memorizing one-off contexts.
    opt.bpe_vocab_size = 620;
    opt.lm_order = 2;
    const PbpeArtifacts art = fit_pbpe(pool, opt);
    const ScoreTable scores = score_pbpe(pool, art.bpe, art.lm, nullptr, 4);
    attach_score_table(pool, scores);

    std::vector<double> avg_ppl;
    std::vector<double> n_unique;
    for (size_t slot = 0; slot < slots.size(); ++slot) {
      SelectionSpec spec;
      spec.criterion = slots[slot].criterion;
      spec.budget_sec = 900.0;
      spec.seed = derive_seed(pool_seed, slot);
      spec.num_speakers = slots[slot].num_speakers;
      spec.num_books = slots[slot].num_books;
      const SubsetResult r = select_subset(pool, spec, &scores);
      const SubsetStats st = subset_stats(pool, r.utterance_ids, {kScorePpl});
      avg_ppl.push_back(st.avg_scores.at(kScorePpl));
      n_unique.push_back(static_cast<double>(*st.n_unique_words));
    }
    const double r = pearson(avg_ppl, n_unique);
    r_sum += r;
    if (r > 0.3) ++corr_hits;
    if (n_unique[tail_slot] > n_unique[head_slot]) ++tail_hits;
  }

  const double elapsed = seconds_since(start);
  const bool pass = corr_hits >= 45 && tail_hits >= 45;
  char detail[160];
  std::snprintf(detail, sizeof detail,
                "r>0.3 in %d/%d (mean r %.3f), tail>head unique words in %d/%d",
                corr_hits, trials, r_sum / trials, tail_hits, trials);
  report(5, "ppl-unique-word-correlation", pass, elapsed, detail);
}

// ---------------------------------------------------------------------------
// 6. Transcript coverage (proxy quality) must not significantly degrade as
// speaker or book diversity grows: 4->8->16 speakers and 2->4->8 books,
// means over 8 replicates, paired one-sided tests over 50 seeds.

void check_diversity_monotonicity() {
  const auto start = Clock::now();

  struct Setting {
    Criterion criterion;
    int32_t count;
  };
  const std::vector<Setting> settings = {
      {Criterion::kSpeakerDiverse, 4}, {Criterion::kSpeakerDiverse, 8},
      {Criterion::kSpeakerDiverse, 16}, {Criterion::kBookDiverse, 2},
      {Criterion::kBookDiverse, 4},    {Criterion::kBookDiverse, 8},
  };

  const int trials = 50;
  std::vector<std::vector<double>> means(settings.size());
  for (int t = 0; t < trials; ++t) {
    const uint64_t pool_seed = 9000 + static_cast<uint64_t>(t);
    const SynthCorpus synth = generate_corpus(standard_synth_config(pool_seed));
    for (size_t s = 0; s < settings.size(); ++s) {
      SelectionSpec spec;
      spec.criterion = settings[s].criterion;
      spec.budget_sec = 900.0;
      spec.seed = derive_seed(pool_seed, 200 + s);
      if (settings[s].criterion == Criterion::kSpeakerDiverse)
        spec.num_speakers = settings[s].count;
      else
        spec.num_books = settings[s].count;
      const auto replicates = replicate_select(synth.pool, spec, 8);
      double sum = 0.0;
      for (const SubsetResult& r : replicates)
        sum += proxy_quality(synth.pool, r.utterance_ids);
      means[s].push_back(sum / 8.0);
    }
  }

  // Adjacent pairs: (smaller, larger) within each sweep.
  const std::vector<std::pair<size_t, size_t>> pairs = {
      {0, 1}, {1, 2}, {3, 4}, {4, 5}};
  int significant_inversions = 0;
  std::string grand;
  for (size_t s = 0; s < settings.size(); ++s) {
    double g = 0.0;
    for (const double v : means[s]) g += v;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%.3f", s == 0 ? "" : "/", g / trials);
    grand += buf;
  }
  for (const auto& [small, large] : pairs) {
    // An inversion survives only if the smaller setting beats the larger
    // setting beyond noise at the 5% level.
    if (paired_t_test_greater(means[small], means[large]).significant)
      ++significant_inversions;
  }

  const double elapsed = seconds_since(start);
  const bool pass = significant_inversions == 0;
  report(6, "diversity-quality-monotonicity", pass, elapsed,
         "significant inversions: " + std::to_string(significant_inversions) +
             "; mean proxy (spk 4/8/16, book 2/4/8): " + grand);
}

// ---------------------------------------------------------------------------
// 7. Save/load round-trips preserve behavior exactly.

void check_round_trips() {
  const auto start = Clock::now();
  int bad = 0;

  const fs::path dir =
      fs::temp_directory_path() / "subsel_acceptance_round_trip";
  fs::create_directories(dir);

  SynthConfig cfg = standard_synth_config(42);
  cfg.n_utts = 400;
  SynthCorpus synth = generate_corpus(cfg);
  CorpusPool& pool = synth.pool;

  // Manifest.
  save_manifest(pool, dir / "m.tsv", dir / "m.units");
  const CorpusPool pool2 = load_manifest(dir / "m.tsv", dir / "m.units",
                                         pool.cluster_count());
  if (!(pool2.utterances() == pool.utterances())) ++bad;

  // BPE and LM over the pool's collapsed units.
  PbpeOptions opt;
  opt.bpe_vocab_size = 200;
  const PbpeArtifacts art = fit_pbpe(pool, opt);
  save_bpe_model(art.bpe, dir / "bpe.model");
  const BpeModel bpe2 = load_bpe_model(dir / "bpe.model");
  art.lm.save(dir / "lm.model");
  const NGramLm lm2 = NGramLm::load(dir / "lm.model");
  for (const Utterance& u : pool.utterances()) {
    const auto collapsed = rle_collapse(u.units);
    const auto tokens = bpe_encode(art.bpe, collapsed);
    if (bpe_encode(bpe2, collapsed) != tokens) ++bad;
    if (lm2.perplexity(tokens) != art.lm.perplexity(tokens)) ++bad;
  }

  // Scores attached from a file reproduce in-memory stats.
  const ScoreTable scores = score_pbpe(pool, art.bpe, art.lm);
  attach_score_table(pool, scores);
  std::vector<std::pair<std::string, double>> rows(scores.entries.begin(),
                                                   scores.entries.end());
  write_score_file(dir / "scores.tsv", rows);
  CorpusPool pool3 = load_manifest(dir / "m.tsv", dir / "m.units",
                                   pool.cluster_count());
  attach_scores(pool3, dir / "scores.tsv", kScorePpl);

  // Subset.
  SelectionSpec spec;
  spec.criterion = Criterion::kScoreTail;
  spec.budget_sec = 300.0;
  spec.seed = 4242;
  const SubsetResult r = select_subset(pool, spec, &scores);
  save_subset(r, dir / "subset.ids", Meta{});
  const auto ids = load_subset_ids(dir / "subset.ids");
  if (ids != r.utterance_ids) ++bad;

  const SubsetStats before = subset_stats(pool, r.utterance_ids, {kScorePpl});
  const SubsetStats after = subset_stats(pool3, ids, {kScorePpl});
  if (before.n_utts != after.n_utts) ++bad;
  if (before.total_duration_sec != after.total_duration_sec) ++bad;
  if (before.n_speakers != after.n_speakers) ++bad;
  if (before.n_books != after.n_books) ++bad;
  if (before.gender_fraction_female != after.gender_fraction_female) ++bad;
  if (before.n_unique_words != after.n_unique_words) ++bad;
  if (before.n_total_words != after.n_total_words) ++bad;
  if (before.avg_scores != after.avg_scores) ++bad;
  if (before.split_fractions != after.split_fractions) ++bad;

  // Resaving loaded models reproduces the files byte for byte.
  save_bpe_model(bpe2, dir / "bpe2.model");
  lm2.save(dir / "lm2.model");
  const auto same_bytes = [](const fs::path& a, const fs::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(fa)),
                         std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(fb)),
                         std::istreambuf_iterator<char>());
    return sa == sb;
  };
  if (!same_bytes(dir / "bpe.model", dir / "bpe2.model")) ++bad;
  if (!same_bytes(dir / "lm.model", dir / "lm2.model")) ++bad;

  std::error_code ec;
  fs::remove_all(dir, ec);

  const double elapsed = seconds_since(start);
  report(7, "save-load-round-trips", bad == 0, elapsed,
         "mismatches: " + std::to_string(bad));
}

}  // namespace

int main() {
  check_werr_table();
  check_bpe_reference();
  check_lm_correctness();
  check_selection_contracts();
  check_ppl_unique_word_link();
  check_diversity_monotonicity();
  check_round_trips();
  if (g_failures > 0) {
    std::printf("acceptance: %d of 7 checks FAILED\n", g_failures);
    return 1;
  }
  std::printf("acceptance: all 7 checks passed\n");
  return 0;
}
