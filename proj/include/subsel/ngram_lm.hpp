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

#ifndef SUBSEL_NGRAM_LM_HPP_
#define SUBSEL_NGRAM_LM_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "subsel/textio.hpp"

namespace subsel {

// Witten-Bell interpolated n-gram model over integer token sequences.
//
// Internally tokens are mapped to a dense alphabet: observed training tokens
// get 0..V-1 in ascending token order, then UNK = V, then (if enabled)
// EOS = V+1, then BOS. BOS only ever appears in contexts, never as a
// predicted event. The smoothing recursion is
//
//   p(w | h) = (c(h, w) + T(h) * p(w | h')) / (c(h) + T(h))
//
// with h' the context h minus its oldest token and T(h) the number of
// distinct continuations of h. A context with c(h) = 0 backs off entirely.
// The order-0 base is uniform over the event alphabet (V observed tokens,
// UNK, and EOS when enabled), so unseen tokens always have mass.
//
// With include_eos = false the model is trained and scored on the bare
// sequences; with true, each training sequence contributes a terminal EOS
// count and scoring appends an EOS event. The flag changes both sides at
// once so perplexities stay comparable.
//
// kMle turns smoothing off (T(h) treated as 0): plain relative frequencies
// with backoff only on entirely unseen contexts. Unseen events then score
// -inf log probability; the mode exists for diagnostics and for exact
// closed-form identities in tests.
class NGramLm {
 public:
  enum class Smoothing { kWittenBell, kMle };

  struct Options {
    int32_t order = 3;        // >= 1
    bool include_eos = true;  // model sequence termination
    Smoothing smoothing = Smoothing::kWittenBell;
  };

  NGramLm() = default;

  static NGramLm train(const std::vector<std::vector<int32_t>>& sequences,
                       const Options& options);

  // Sum of natural-log event probabilities for one sequence (plus EOS when
  // enabled). An empty sequence with include_eos = false scores 0.
  double log_prob(std::span<const int32_t> tokens) const;

  // exp(-log_prob / events); events counts the appended EOS. Perplexity of
  // an empty sequence without EOS is defined as 1.
  double perplexity(std::span<const int32_t> tokens) const;

  int32_t order() const { return options_.order; }
  bool include_eos() const { return options_.include_eos; }
  Smoothing smoothing() const { return options_.smoothing; }
  int64_t vocab_size() const { return static_cast<int64_t>(vocab_.size()); }

  // p(event | context) with the same backoff rules scoring uses. `context`
  // holds external tokens, most recent last; only the trailing order-1 are
  // used. Event kEosEvent asks for the end-of-sequence probability.
  // Exposed so normalization can be checked directly.
  static constexpr int32_t kEosEvent = INT32_MIN;
  double cond_prob(std::span<const int32_t> context, int32_t event) const;

  void save(const std::filesystem::path& path, const Meta& meta = {}) const;
  static NGramLm load(const std::filesystem::path& path);

 private:
  struct ContextCounts {
    int64_t total = 0;                 // c(h)
    std::map<int32_t, int64_t> cont;   // c(h, w), keyed by internal event id
  };

  // Internal symbol ids. Events span [0, num_events_); BOS is context-only.
  int32_t unk_() const { return static_cast<int32_t>(vocab_.size()); }
  int32_t eos_() const { return unk_() + 1; }
  int32_t bos_() const { return options_.include_eos ? eos_() + 1 : unk_() + 1; }

  int32_t intern_(int32_t token) const;  // external token -> event id (UNK if unseen)
  double prob_(std::span<const int32_t> context, int32_t event) const;
  double refine_(const ContextCounts& cc, int32_t event, double backoff) const;
  void count_sequence_(const std::vector<int32_t>& internal);

  Options options_;
  std::vector<int32_t> vocab_;  // ascending external tokens seen in training
  int32_t num_events_ = 0;      // V + 1 (+1 when include_eos)
  // counts_[k] holds order-(k+1) contexts, i.e. contexts of length k.
  // Keyed by the context rendered as a u32string of internal ids.
  std::vector<std::map<std::u32string, ContextCounts>> counts_;
};

}  // namespace subsel

#endif  // SUBSEL_NGRAM_LM_HPP_
