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

#include "subsel/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "subsel/error.hpp"

namespace subsel {

namespace {

const char* smoothing_name(NGramLm::Smoothing s) {
  return s == NGramLm::Smoothing::kWittenBell ? "witten_bell" : "mle";
}

}  // namespace

int32_t NGramLm::intern_(int32_t token) const {
  const auto it = std::lower_bound(vocab_.begin(), vocab_.end(), token);
  if (it != vocab_.end() && *it == token)
    return static_cast<int32_t>(it - vocab_.begin());
  return unk_();
}

void NGramLm::count_sequence_(const std::vector<int32_t>& internal) {
  // `internal` is BOS^(order-1) + tokens (+ EOS). Every non-BOS position is
  // an event; each event feeds contexts of every length 0..order-1, which is
  // what the interpolation recursion reads.
  const auto order = static_cast<size_t>(options_.order);
  for (size_t pos = order - 1; pos < internal.size(); ++pos) {
    const int32_t event = internal[pos];
    for (size_t k = 0; k < order; ++k) {
      std::u32string ctx;
      ctx.reserve(k);
      for (size_t j = pos - k; j < pos; ++j)
        ctx.push_back(static_cast<char32_t>(internal[j]));
      ContextCounts& cc = counts_[k][ctx];
      ++cc.total;
      ++cc.cont[event];
    }
  }
}

NGramLm NGramLm::train(const std::vector<std::vector<int32_t>>& sequences,
                       const Options& options) {
  if (sequences.empty()) throw DataError("lm_train: empty corpus");
  if (options.order < 1) throw UsageError("lm_train: order must be >= 1");

  NGramLm lm;
  lm.options_ = options;

  std::set<int32_t> vocab_set;
  for (const auto& seq : sequences)
    for (int32_t tok : seq) vocab_set.insert(tok);
  lm.vocab_.assign(vocab_set.begin(), vocab_set.end());
  lm.num_events_ =
      static_cast<int32_t>(lm.vocab_.size()) + 1 + (options.include_eos ? 1 : 0);
  lm.counts_.resize(static_cast<size_t>(options.order));

  for (const auto& seq : sequences) {
    std::vector<int32_t> internal(static_cast<size_t>(options.order) - 1,
                                  lm.bos_());
    internal.reserve(internal.size() + seq.size() + 1);
    for (int32_t tok : seq) internal.push_back(lm.intern_(tok));
    if (options.include_eos) internal.push_back(lm.eos_());
    lm.count_sequence_(internal);
  }
  return lm;
}

double NGramLm::prob_(std::span<const int32_t> context, int32_t event) const {
  // Bottom-up over context suffixes: start from the uniform base over the
  // event alphabet, then refine with each longer context that has counts.
  // A context with no counts keeps the shorter-context estimate (pure
  // backoff); with MLE smoothing T is forced to 0 and unseen events get 0.
  double p = 1.0 / static_cast<double>(num_events_);
  for (size_t k = 0; k <= context.size(); ++k) {
    if (k == 0) {
      const auto it = counts_[0].find(std::u32string());
      if (it == counts_[0].end()) continue;
      p = refine_(it->second, event, p);
      continue;
    }
    std::u32string ctx;
    ctx.reserve(k);
    for (size_t j = context.size() - k; j < context.size(); ++j)
      ctx.push_back(static_cast<char32_t>(context[j]));
    const auto it = counts_[k].find(ctx);
    if (it == counts_[k].end()) continue;
    p = refine_(it->second, event, p);
  }
  return p;
}

double NGramLm::refine_(const ContextCounts& cc, int32_t event,
                        double backoff) const {
  const auto cit = cc.cont.find(event);
  const double c_hw = cit == cc.cont.end() ? 0.0 : static_cast<double>(cit->second);
  const double t = options_.smoothing == Smoothing::kWittenBell
                       ? static_cast<double>(cc.cont.size())
                       : 0.0;
  const double den = static_cast<double>(cc.total) + t;
  internal_check(den > 0.0, "NGramLm: empty context counts entry");
  return (c_hw + t * backoff) / den;
}

double NGramLm::cond_prob(std::span<const int32_t> context, int32_t event) const {
  internal_check(options_.order >= 1 && !counts_.empty(),
                 "NGramLm: model not trained");
  int32_t ev;
  if (event == kEosEvent) {
    if (!options_.include_eos)
      throw UsageError("NGramLm: EOS probability requested with EOS disabled");
    ev = eos_();
  } else {
    ev = intern_(event);
  }

  const auto order = static_cast<size_t>(options_.order);
  std::vector<int32_t> ctx;
  ctx.reserve(order - 1);
  const size_t use = std::min(context.size(), order - 1);
  for (size_t i = context.size() - use; i < context.size(); ++i)
    ctx.push_back(intern_(context[i]));
  // Callers give only the sequence history; pad to a full-width context the
  // same way scoring does.
  while (ctx.size() < order - 1) ctx.insert(ctx.begin(), bos_());
  return prob_(ctx, ev);
}

double NGramLm::log_prob(std::span<const int32_t> tokens) const {
  internal_check(options_.order >= 1 && !counts_.empty(),
                 "NGramLm: model not trained");
  const auto order = static_cast<size_t>(options_.order);
  std::vector<int32_t> internal(order - 1, bos_());
  internal.reserve(internal.size() + tokens.size() + 1);
  for (int32_t tok : tokens) internal.push_back(intern_(tok));
  if (options_.include_eos) internal.push_back(eos_());

  double sum = 0.0;
  for (size_t pos = order - 1; pos < internal.size(); ++pos) {
    const std::span<const int32_t> ctx(internal.data() + pos - (order - 1),
                                       order - 1);
    sum += std::log(prob_(ctx, internal[pos]));
  }
  return sum;
}

double NGramLm::perplexity(std::span<const int32_t> tokens) const {
  internal_check(options_.order >= 1 && !counts_.empty(),
                 "NGramLm: model not trained");
  const size_t events = tokens.size() + (options_.include_eos ? 1 : 0);
  if (events == 0)
    throw DataError("perplexity: zero-length sequence with EOS disabled");

  const auto order = static_cast<size_t>(options_.order);
  std::vector<int32_t> internal(order - 1, bos_());
  internal.reserve(internal.size() + tokens.size() + 1);
  for (int32_t tok : tokens) internal.push_back(intern_(tok));
  if (options_.include_eos) internal.push_back(eos_());

  double sum = 0.0;
  double first = 0.0;
  bool all_same = true;
  for (size_t pos = order - 1; pos < internal.size(); ++pos) {
    const std::span<const int32_t> ctx(internal.data() + pos - (order - 1),
                                       order - 1);
    const double p = prob_(ctx, internal[pos]);
    if (pos == order - 1)
      first = p;
    else if (p != first)
      all_same = false;
    sum += std::log(p);
  }
  // When every event has the same probability p the geometric mean is p
  // itself, so skip the exp/log round trip; this keeps the uniform-unigram
  // perplexity exactly equal to the vocabulary size.
  if (all_same) return 1.0 / first;
  return std::exp(-sum / static_cast<double>(events));
}

void NGramLm::save(const std::filesystem::path& path, const Meta& meta) const {
  std::ofstream out = open_output(path);
  write_meta_header(out, meta);
  out << "lm_format 1\n";
  out << "order " << options_.order << "\n";
  out << "smoothing " << smoothing_name(options_.smoothing) << "\n";
  out << "include_eos " << (options_.include_eos ? 1 : 0) << "\n";
  out << "vocab " << vocab_.size() << "\n";
  for (int32_t tok : vocab_) out << tok << "\n";
  // Counts only; probabilities are recomputed on load, which both keeps the
  // file small and guarantees reloaded perplexities are bit-identical.
  for (size_t k = 0; k < counts_.size(); ++k) {
    out << "contexts " << k << ' ' << counts_[k].size() << "\n";
    for (const auto& [ctx, cc] : counts_[k]) {
      out << "c " << ctx.size();
      for (char32_t sym : ctx) out << ' ' << static_cast<uint32_t>(sym);
      out << ' ' << cc.total << ' ' << cc.cont.size();
      for (const auto& [event, n] : cc.cont) out << ' ' << event << ' ' << n;
      out << "\n";
    }
  }
  if (!out) throw DataError("failed writing " + path.string());
}

NGramLm NGramLm::load(const std::filesystem::path& path) {
  const std::vector<std::string> lines = read_lines(path);
  size_t i = 0;
  const auto next_line = [&]() -> std::string_view {
    while (i < lines.size() && is_comment_line(lines[i])) ++i;
    if (i >= lines.size())
      throw DataError(path.string() + ": truncated LM file");
    return lines[i++];
  };
  const auto fail = [&](const std::string& msg) -> DataError {
    return DataError(path.string() + ":" + std::to_string(i) + ": " + msg);
  };
  const auto expect_kv = [&](std::string_view key) -> std::string {
    const auto fields = split_ws(next_line());
    if (fields.size() != 2 || fields[0] != key)
      throw fail("expected `" + std::string(key) + " <value>`");
    return std::string(fields[1]);
  };
  const auto to_int = [&](const std::string& s) -> int64_t {
    int64_t v = 0;
    if (!try_parse_int(s, v)) throw fail("bad integer \"" + s + "\"");
    return v;
  };

  if (to_int(expect_kv("lm_format")) != 1)
    throw fail("unsupported LM format version");
  NGramLm lm;
  lm.options_.order = static_cast<int32_t>(to_int(expect_kv("order")));
  if (lm.options_.order < 1) throw fail("order must be >= 1");
  const std::string smoothing = expect_kv("smoothing");
  if (smoothing == "witten_bell") {
    lm.options_.smoothing = Smoothing::kWittenBell;
  } else if (smoothing == "mle") {
    lm.options_.smoothing = Smoothing::kMle;
  } else {
    throw fail("unknown smoothing \"" + smoothing + "\"");
  }
  lm.options_.include_eos = to_int(expect_kv("include_eos")) != 0;

  const int64_t n_vocab = to_int(expect_kv("vocab"));
  lm.vocab_.reserve(static_cast<size_t>(n_vocab));
  for (int64_t v = 0; v < n_vocab; ++v) {
    const int64_t tok = to_int(std::string(next_line()));
    if (!lm.vocab_.empty() && tok <= lm.vocab_.back())
      throw fail("vocab not strictly ascending");
    lm.vocab_.push_back(static_cast<int32_t>(tok));
  }
  lm.num_events_ = static_cast<int32_t>(lm.vocab_.size()) + 1 +
                   (lm.options_.include_eos ? 1 : 0);
  lm.counts_.resize(static_cast<size_t>(lm.options_.order));

  for (size_t k = 0; k < lm.counts_.size(); ++k) {
    const auto header = split_ws(next_line());
    int64_t klen = 0, n_ctx = 0;
    if (header.size() != 3 || header[0] != "contexts" ||
        !try_parse_int(header[1], klen) || klen != static_cast<int64_t>(k) ||
        !try_parse_int(header[2], n_ctx))
      throw fail("expected `contexts " + std::to_string(k) + " <n>`");
    for (int64_t c = 0; c < n_ctx; ++c) {
      const auto fields = split_ws(next_line());
      size_t f = 0;
      const auto next_int = [&]() -> int64_t {
        if (f >= fields.size()) throw fail("truncated context line");
        int64_t v = 0;
        if (!try_parse_int(fields[f], v))
          throw fail("bad integer \"" + std::string(fields[f]) + "\"");
        ++f;
        return v;
      };
      if (fields.empty() || fields[0] != "c") throw fail("expected `c ...`");
      ++f;
      const int64_t m = next_int();
      if (m != static_cast<int64_t>(k)) throw fail("context length mismatch");
      std::u32string ctx;
      for (int64_t j = 0; j < m; ++j)
        ctx.push_back(static_cast<char32_t>(next_int()));
      ContextCounts cc;
      cc.total = next_int();
      const int64_t n_events = next_int();
      int64_t check_total = 0;
      for (int64_t e = 0; e < n_events; ++e) {
        const auto event = static_cast<int32_t>(next_int());
        const int64_t n = next_int();
        if (n <= 0) throw fail("non-positive event count");
        cc.cont[event] = n;
        check_total += n;
      }
      if (f != fields.size()) throw fail("trailing fields in context line");
      if (check_total != cc.total)
        throw fail("context total does not match event counts");
      if (!lm.counts_[k].emplace(std::move(ctx), std::move(cc)).second)
        throw fail("duplicate context");
    }
  }
  return lm;
}

}  // namespace subsel
