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

// subsel: budgeted transcription-subset selection over clustered speech units.
//
// One subcommand per pipeline stage; `pipeline` chains them. Every artifact
// starts with '#' metadata lines (tool version, exact command line, seed), so
// rerunning a command line reproduces its outputs byte for byte. Progress
// notes go to stderr; data goes to the declared files or stdout.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "subsel/analysis.hpp"
#include "subsel/bpe.hpp"
#include "subsel/corpus.hpp"
#include "subsel/error.hpp"
#include "subsel/manifest.hpp"
#include "subsel/ngram_lm.hpp"
#include "subsel/rle.hpp"
#include "subsel/scoring.hpp"
#include "subsel/selection.hpp"
#include "subsel/synth.hpp"
#include "subsel/textio.hpp"
#include "subsel/version.hpp"

namespace subsel {
namespace {

namespace fs = std::filesystem;

void note(const std::string& msg) { std::cerr << "[subsel] " << msg << "\n"; }

// The command line as echoed into artifact headers. argv[0] is normalized to
// the tool name so the echo does not depend on how the binary was invoked.
std::string command_echo(int argc, char** argv) {
  std::string out = kToolName;
  for (int i = 1; i < argc; ++i) {
    const std::string_view arg = argv[i];
    out += ' ';
    if (arg.empty() || arg.find_first_of(" \t\"") != std::string_view::npos) {
      out += '"';
      for (const char c : arg) {
        if (c == '"') out += '\\';
        out += c;
      }
      out += '"';
    } else {
      out.append(arg);
    }
  }
  return out;
}

// Worker-count default: SUBSEL_WORKERS when set, else 1.
int32_t env_workers() {
  const char* env = std::getenv("SUBSEL_WORKERS");
  if (env == nullptr || *env == '\0') return 1;
  int64_t v = 0;
  if (!try_parse_int(env, v) || v < 1 || v > 4096)
    throw UsageError("SUBSEL_WORKERS must be a positive integer, got \"" +
                     std::string(env) + "\"");
  return static_cast<int32_t>(v);
}

NGramLm::Smoothing parse_smoothing(const std::string& name) {
  if (name == "witten_bell") return NGramLm::Smoothing::kWittenBell;
  if (name == "mle") return NGramLm::Smoothing::kMle;
  throw UsageError("smoothing must be witten_bell or mle, got \"" + name + "\"");
}

Gender parse_gender_flag(const std::string& name) {
  const Gender g = parse_gender(name);
  if (g == Gender::kUnknown)
    throw UsageError("gender must be female or male, got \"" + name + "\"");
  return g;
}

std::string known_criteria() {
  std::string out;
  for (const Criterion c : all_criteria()) {
    if (!out.empty()) out += ", ";
    out += criterion_name(c);
  }
  return out;
}

Criterion parse_criterion_flag(const std::string& name) {
  const auto c = parse_criterion(name);
  if (!c)
    throw UsageError("unknown criterion \"" + name + "\" (one of: " +
                     known_criteria() + ")");
  return *c;
}

ScoreTable load_score_table(const fs::path& path, const std::string& kind) {
  ScoreTable table;
  table.kind = kind;
  table.provenance = "loaded from " + path.string();
  for (const auto& [id, v] : read_score_file(path)) table.entries.emplace(id, v);
  return table;
}

// ---------------------------------------------------------------------------
// Stage actions. `pipeline` calls these same functions with its own paths, so
// chained and individually-run stages produce identical data bytes.

void run_rle(const fs::path& units_in, const fs::path& units_out,
             const Meta& meta) {
  auto rows = read_units_file(units_in);
  int64_t before = 0;
  int64_t after = 0;
  for (auto& [id, units] : rows) {
    before += static_cast<int64_t>(units.size());
    units = rle_collapse(units);
    after += static_cast<int64_t>(units.size());
  }
  write_units_file(units_out, rows, meta);
  note("rle: " + std::to_string(rows.size()) + " sequences, " +
       std::to_string(before) + " -> " + std::to_string(after) + " units");
}

void run_bpe_train(const fs::path& units_in, const fs::path& model_out,
                   int32_t vocab_size, int32_t cluster_count, const Meta& meta) {
  const auto rows = read_units_file(units_in);
  std::vector<std::vector<int32_t>> sequences;
  sequences.reserve(rows.size());
  for (const auto& [id, units] : rows) sequences.push_back(units);
  const BpeModel model = bpe_train(sequences, vocab_size, cluster_count);
  save_bpe_model(model, model_out, meta);
  note("bpe-train: " + std::to_string(model.base_units.size()) +
       " base units + " + std::to_string(model.merges.size()) + " merges");
}

void run_bpe_apply(const fs::path& model_path, const fs::path& units_in,
                   const fs::path& tokens_out, const Meta& meta) {
  const BpeModel model = load_bpe_model(model_path);
  auto rows = read_units_file(units_in);
  int64_t tokens = 0;
  int64_t unk = 0;
  for (auto& [id, units] : rows) {
    units = bpe_encode(model, units);
    tokens += static_cast<int64_t>(units.size());
    unk += std::count(units.begin(), units.end(), kBpeUnkToken);
  }
  write_units_file(tokens_out, rows, meta);
  note("bpe-apply: " + std::to_string(rows.size()) + " sequences, " +
       std::to_string(tokens) + " tokens, " + std::to_string(unk) + " unknown");
}

void run_lm_train(const fs::path& tokens_in, const fs::path& model_out,
                  int32_t order, const std::string& smoothing, bool include_eos,
                  const Meta& meta) {
  NGramLm::Options options;
  options.order = order;
  options.include_eos = include_eos;
  options.smoothing = parse_smoothing(smoothing);
  const auto rows = read_units_file(tokens_in);
  std::vector<std::vector<int32_t>> sequences;
  sequences.reserve(rows.size());
  for (const auto& [id, units] : rows) sequences.push_back(units);
  const NGramLm lm = NGramLm::train(sequences, options);
  lm.save(model_out, meta);
  note("lm-train: order " + std::to_string(lm.order()) + ", vocab " +
       std::to_string(lm.vocab_size()));
}

void run_score_ppl(const fs::path& manifest, const fs::path& units,
                   int32_t cluster_count, const fs::path& bpe_path,
                   const fs::path& lm_path, const fs::path& out,
                   const std::optional<fs::path>& unk_rate_out, int32_t workers,
                   const Meta& meta) {
  const CorpusPool pool = load_manifest(manifest, units, cluster_count);
  const BpeModel bpe = load_bpe_model(bpe_path);
  const NGramLm lm = NGramLm::load(lm_path);
  ScoreTable unk_table;
  const ScoreTable table = score_pbpe(
      pool, bpe, lm, unk_rate_out ? &unk_table : nullptr, workers);
  write_score_file(out, {table.entries.begin(), table.entries.end()}, meta);
  if (unk_rate_out)
    write_score_file(*unk_rate_out,
                     {unk_table.entries.begin(), unk_table.entries.end()}, meta);
  note("score: " + std::to_string(table.entries.size()) +
       " utterances scored (" + table.kind + ", " + std::to_string(workers) +
       (workers == 1 ? " worker)" : " workers)"));
}

// Stats rows share one column layout per pool, so files concatenate cleanly.
std::vector<std::string> pool_split_labels(const CorpusPool& pool) {
  std::set<std::string> labels;
  for (const Utterance& u : pool.utterances())
    if (u.source_split) labels.insert(*u.source_split);
  return {labels.begin(), labels.end()};
}

void write_stats_header(std::ostream& os, const std::string& key_column,
                        const std::vector<std::string>& score_kinds,
                        const std::vector<std::string>& split_labels) {
  os << key_column
     << "\tn_utts\tduration_sec\tn_speakers\tn_books\tfrac_female"
        "\tn_unique_words\tn_total_words";
  for (const std::string& k : score_kinds) os << "\tavg_" << k;
  for (const std::string& s : split_labels) os << "\tfrac_" << s;
  os << "\n";
}

void write_stats_row(std::ostream& os, const std::string& key,
                     const SubsetStats& st,
                     const std::vector<std::string>& score_kinds,
                     const std::vector<std::string>& split_labels) {
  os << key << '\t' << st.n_utts << '\t' << format_double(st.total_duration_sec)
     << '\t' << st.n_speakers << '\t' << st.n_books << '\t'
     << (st.gender_fraction_female ? format_double(*st.gender_fraction_female)
                                   : "na")
     << '\t'
     << (st.n_unique_words ? std::to_string(*st.n_unique_words) : "na") << '\t'
     << (st.n_total_words ? std::to_string(*st.n_total_words) : "na");
  for (const std::string& k : score_kinds)
    os << '\t' << format_double(st.avg_scores.at(k));
  for (const std::string& s : split_labels) {
    const auto it = st.split_fractions.find(s);
    os << '\t'
       << format_double(it == st.split_fractions.end() ? 0.0 : it->second);
  }
  os << "\n";
}

std::vector<fs::path> run_select(const fs::path& manifest_path,
                                 const std::optional<fs::path>& scores_path,
                                 const SelectionSpec& spec, int32_t replicates,
                                 const std::string& out_prefix,
                                 const Meta& meta) {
  CorpusPool pool = load_manifest(manifest_path, std::nullopt, 1);
  std::optional<ScoreTable> table;
  if (scores_path) table = load_score_table(*scores_path, spec.score_kind);

  const std::vector<SubsetResult> results =
      replicate_select(pool, spec, replicates, table ? &*table : nullptr);

  std::vector<fs::path> ids_paths;
  ids_paths.reserve(results.size());
  for (const SubsetResult& r : results) {
    fs::path ids_path =
        out_prefix + "_r" + std::to_string(r.replicate_index) + ".ids";
    save_subset(r, ids_path, meta);
    note("select: replicate " + std::to_string(r.replicate_index) + ": " +
         std::to_string(r.utterance_ids.size()) + " utterances, " +
         format_double(r.total_duration_sec) + " s");
    ids_paths.push_back(std::move(ids_path));
  }

  std::vector<std::string> kinds;
  if (table) {
    attach_score_table(pool, *table);
    kinds.push_back(spec.score_kind);
  }
  const std::vector<std::string> splits = pool_split_labels(pool);
  std::ofstream os = open_output(out_prefix + "_summary.tsv");
  write_meta_header(os, meta);
  write_stats_header(os, "replicate", kinds, splits);
  for (const SubsetResult& r : results)
    write_stats_row(os, std::to_string(r.replicate_index),
                    subset_stats(pool, r.utterance_ids, kinds), kinds, splits);
  if (!os) throw DataError("failed writing " + out_prefix + "_summary.tsv");
  return ids_paths;
}

void run_stats(const fs::path& manifest_path,
               const std::optional<fs::path>& scores_path,
               const std::string& score_kind,
               const std::vector<std::string>& subset_paths,
               const std::optional<fs::path>& out_path, const Meta& meta) {
  CorpusPool pool = load_manifest(manifest_path, std::nullopt, 1);
  std::vector<std::string> kinds;
  if (scores_path) {
    attach_score_table(pool, load_score_table(*scores_path, score_kind));
    kinds.push_back(score_kind);
  }
  const std::vector<std::string> splits = pool_split_labels(pool);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (out_path) {
    file = open_output(*out_path);
    os = &file;
  }
  write_meta_header(*os, meta);
  write_stats_header(*os, "key", kinds, splits);
  if (subset_paths.empty()) {
    std::vector<std::string> all_ids;
    all_ids.reserve(pool.size());
    for (const Utterance& u : pool.utterances()) all_ids.push_back(u.id);
    write_stats_row(*os, "pool", subset_stats(pool, all_ids, kinds), kinds,
                    splits);
  } else {
    for (const std::string& sp : subset_paths)
      write_stats_row(*os, sp, subset_stats(pool, load_subset_ids(sp), kinds),
                      kinds, splits);
  }
  if (out_path && !file)
    throw DataError("failed writing " + out_path->string());
}

void run_correlate(const fs::path& table_path,
                   const std::vector<std::string>& wanted,
                   const std::optional<fs::path>& out_path, const Meta& meta) {
  const std::vector<std::string> lines = read_lines(table_path);
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  for (const std::string& line : lines) {
    if (is_comment_line(line) || line.empty()) continue;
    const auto fields = split_tabs(line);
    std::vector<std::string> copied(fields.begin(), fields.end());
    if (header.empty()) {
      header = std::move(copied);
      continue;
    }
    if (copied.size() != header.size())
      throw DataError(table_path.string() + ": row has " +
                      std::to_string(copied.size()) + " fields, header has " +
                      std::to_string(header.size()));
    rows.push_back(std::move(copied));
  }
  if (header.empty())
    throw DataError(table_path.string() + ": no header row");

  const auto parses = [&](size_t col, const std::vector<std::string>& row) {
    double v = 0.0;
    return try_parse_double(row[col], v);
  };

  std::vector<size_t> use;
  if (wanted.empty()) {
    // Default: every fully numeric column except the leading key column.
    for (size_t c = 1; c < header.size(); ++c) {
      const bool numeric = std::all_of(
          rows.begin(), rows.end(),
          [&](const std::vector<std::string>& r) { return parses(c, r); });
      if (numeric && !rows.empty()) use.push_back(c);
    }
    if (use.empty())
      throw DataError(table_path.string() + ": no numeric columns to correlate");
  } else {
    for (const std::string& name : wanted) {
      const auto it = std::find(header.begin(), header.end(), name);
      if (it == header.end())
        throw UsageError("column \"" + name + "\" not in table header");
      use.push_back(static_cast<size_t>(it - header.begin()));
    }
  }

  // Rows where a selected cell is not numeric (e.g. "na") drop out of every
  // column, so the columns stay row-aligned.
  size_t skipped = 0;
  std::vector<std::pair<std::string, std::vector<double>>> columns;
  columns.reserve(use.size());
  for (const size_t c : use) columns.emplace_back(header[c], std::vector<double>{});
  for (const std::vector<std::string>& row : rows) {
    const bool ok = std::all_of(use.begin(), use.end(),
                                [&](size_t c) { return parses(c, row); });
    if (!ok) {
      ++skipped;
      continue;
    }
    for (size_t i = 0; i < use.size(); ++i) {
      double v = 0.0;
      try_parse_double(row[use[i]], v);
      columns[i].second.push_back(v);
    }
  }
  if (skipped > 0)
    note("correlate: skipped " + std::to_string(skipped) +
         " rows with non-numeric cells");

  const CorrelationMatrix m = correlation_matrix(columns);

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (out_path) {
    file = open_output(*out_path);
    os = &file;
  }
  write_meta_header(*os, meta);
  *os << "column";
  for (const std::string& label : m.labels) *os << '\t' << label;
  *os << "\n";
  for (size_t i = 0; i < m.labels.size(); ++i) {
    *os << m.labels[i];
    for (const double v : m.values[i]) *os << '\t' << format_double(v);
    *os << "\n";
  }
  if (out_path && !file)
    throw DataError("failed writing " + out_path->string());
}

std::vector<std::pair<std::string, double>> read_wer_table(const fs::path& in) {
  const std::vector<std::string> expected = {"label", "wer"};
  bool saw_header = false;
  std::vector<std::pair<std::string, double>> rows;
  size_t lineno = 0;
  for (const std::string& line : read_lines(in)) {
    ++lineno;
    if (is_comment_line(line) || line.empty()) continue;
    const auto fields = split_tabs(line);
    if (!saw_header) {
      if (std::vector<std::string>(fields.begin(), fields.end()) != expected)
        throw DataError(in.string() +
                        ": header must be `label wer` (tab separated)");
      saw_header = true;
      continue;
    }
    if (fields.size() != expected.size())
      throw DataError(in.string() + ":" + std::to_string(lineno) +
                      ": expected 2 fields");
    double w = 0.0;
    if (!try_parse_double(fields[1], w) || !std::isfinite(w) || w <= 0.0)
      throw DataError(in.string() + ":" + std::to_string(lineno) +
                      ": WER must be a positive number");
    rows.emplace_back(std::string(fields[0]), w);
  }
  if (!saw_header) throw DataError(in.string() + ": no header row");
  return rows;
}

void run_werr_check(const fs::path& in, double tolerance_pp,
                    const std::optional<fs::path>& out_path, const Meta& meta) {
  const std::vector<std::string> expected = {"label", "baseline_wer",
                                             "stated_wer", "stated_werr"};
  bool saw_header = false;
  std::vector<WerrCheckRow> checked;
  size_t lineno = 0;
  for (const std::string& line : read_lines(in)) {
    ++lineno;
    if (is_comment_line(line) || line.empty()) continue;
    const auto fields = split_tabs(line);
    if (!saw_header) {
      if (std::vector<std::string>(fields.begin(), fields.end()) != expected)
        throw DataError(in.string() +
                        ": header must be `label baseline_wer stated_wer "
                        "stated_werr` (tab separated)");
      saw_header = true;
      continue;
    }
    if (fields.size() != expected.size())
      throw DataError(in.string() + ":" + std::to_string(lineno) +
                      ": expected " + std::to_string(expected.size()) +
                      " fields");
    double b = 0.0;
    double w = 0.0;
    double s = 0.0;
    if (!try_parse_double(fields[1], b) || !try_parse_double(fields[2], w) ||
        !try_parse_double(fields[3], s))
      throw DataError(in.string() + ":" + std::to_string(lineno) +
                      ": non-numeric WER field");
    checked.push_back(
        check_werr(std::string(fields[0]), b, w, s, tolerance_pp));
  }
  if (!saw_header) throw DataError(in.string() + ": no header row");

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (out_path) {
    file = open_output(*out_path);
    os = &file;
  }
  write_meta_header(*os, meta);
  *os << "label\tbaseline_wer\tstated_wer\tstated_werr\trecomputed_werr"
         "\tdiscrepancy_pp\tflagged\n";
  size_t flagged = 0;
  for (const WerrCheckRow& r : checked) {
    *os << r.label << '\t' << format_double(r.baseline_wer) << '\t'
        << format_double(r.stated_wer) << '\t' << format_double(r.stated_werr)
        << '\t' << format_double(r.recomputed_werr) << '\t'
        << format_double(r.discrepancy_pp) << '\t' << (r.flagged ? 1 : 0)
        << "\n";
    if (r.flagged) ++flagged;
  }
  if (out_path && !file)
    throw DataError("failed writing " + out_path->string());
  note("werr: checked " + std::to_string(checked.size()) + " rows, " +
       std::to_string(flagged) + " flagged beyond " +
       format_double(tolerance_pp) + " pp");
}

// Selection knobs shared by `select` and `pipeline`. num_speakers and
// num_books only enter the spec when their flag was passed or the criterion
// needs them, in which case the defaults (24 speakers, 16 books) apply.
struct SelectKnobs {
  std::string criterion = "pure_random";
  double budget_hours = 10.0;
  uint64_t seed = 1;
  int32_t replicates = 8;
  int32_t num_speakers = 24;
  int32_t num_books = 16;
  std::string gender = "female";
  std::string score_kind = kScorePpl;
  double p = 0.15;
  bool cover_all = false;

  CLI::Option* num_speakers_opt = nullptr;
  CLI::Option* num_books_opt = nullptr;
  CLI::Option* p_opt = nullptr;
};

void add_select_knobs(CLI::App* sub, SelectKnobs& k, bool with_score_kind) {
  sub->add_option("--criterion", k.criterion,
                  "selection criterion (one of: " + known_criteria() + ")")
      ->required();
  sub->add_option("--budget-hours", k.budget_hours,
                  "transcription budget in hours")
      ->capture_default_str();
  sub->add_option("--seed", k.seed, "base RNG seed")->capture_default_str();
  sub->add_option("--replicates", k.replicates,
                  "independent subsets to draw")
      ->capture_default_str();
  k.num_speakers_opt =
      sub->add_option("--num-speakers", k.num_speakers,
                      "speakers for gender_restricted / speaker_diverse")
          ->capture_default_str();
  k.num_books_opt = sub->add_option("--num-books", k.num_books,
                                    "books for book_diverse")
                        ->capture_default_str();
  sub->add_option("--gender", k.gender,
                  "gender for gender_restricted (female or male)")
      ->capture_default_str();
  if (with_score_kind)
    sub->add_option("--score-kind", k.score_kind,
                    "score column name for score criteria")
        ->capture_default_str();
  k.p_opt = sub->add_option(
      "--p", k.p,
      "tail / middle fraction (default 0.15, middle bands 0.40)");
  sub->add_flag("--stratify-cover-all", k.cover_all,
                "fail unless every stratum in the score tail is represented");
}

SelectionSpec build_selection_spec(const SelectKnobs& k) {
  SelectionSpec spec;
  spec.criterion = parse_criterion_flag(k.criterion);
  spec.budget_sec = k.budget_hours * 3600.0;
  spec.seed = k.seed;
  spec.score_kind = k.score_kind;
  spec.gender = parse_gender_flag(k.gender);
  spec.stratify_cover_all = k.cover_all;
  const bool wants_speakers = spec.criterion == Criterion::kGenderRestricted ||
                              spec.criterion == Criterion::kSpeakerDiverse;
  if (k.num_speakers_opt->count() > 0 || wants_speakers)
    spec.num_speakers = k.num_speakers;
  if (k.num_books_opt->count() > 0 || spec.criterion == Criterion::kBookDiverse)
    spec.num_books = k.num_books;
  if (k.p_opt->count() > 0) spec.p = k.p;
  return spec;
}

}  // namespace
}  // namespace subsel

int main(int argc, char** argv) {
  using namespace subsel;

  CLI::App app{"budgeted transcription-subset selection over clustered speech "
               "units"};
  app.require_subcommand(1);
  app.set_version_flag("--version",
                       std::string(kToolName) + " " + kVersion);
  const std::string echo = command_echo(argc, argv);

  // rle ---------------------------------------------------------------------
  auto* rle = app.add_subcommand(
      "rle", "collapse runs of identical cluster units in a units file");
  struct {
    std::string units, out;
  } rle_args;
  rle->add_option("--units", rle_args.units, "input units file")->required();
  rle->add_option("--out", rle_args.out, "output units file")->required();
  rle->callback([&]() {
    run_rle(rle_args.units, rle_args.out, Meta{echo, std::nullopt});
  });

  // bpe-train ---------------------------------------------------------------
  auto* bpe_tr = app.add_subcommand(
      "bpe-train", "learn a byte-pair vocabulary over unit sequences");
  struct {
    std::string units, out_model;
    int32_t vocab_size = 5000;
    int32_t cluster_count = 0;
  } bt;
  bpe_tr->add_option("--units", bt.units, "input units file (run-collapsed)")
      ->required();
  bpe_tr->add_option("--out-model", bt.out_model, "output model file")
      ->required();
  bpe_tr->add_option("--vocab-size", bt.vocab_size, "target token count")
      ->capture_default_str();
  bpe_tr->add_option("--cluster-count", bt.cluster_count,
                     "unit alphabet size K; units must lie in [0, K)")
      ->required();
  bpe_tr->callback([&]() {
    run_bpe_train(bt.units, bt.out_model, bt.vocab_size, bt.cluster_count,
                  Meta{echo, std::nullopt});
  });

  // bpe-apply ---------------------------------------------------------------
  auto* bpe_ap = app.add_subcommand(
      "bpe-apply", "encode unit sequences with a trained byte-pair model");
  struct {
    std::string model, units, out;
  } ba;
  bpe_ap->add_option("--model", ba.model, "model from bpe-train")->required();
  bpe_ap->add_option("--units", ba.units, "input units file (run-collapsed)")
      ->required();
  bpe_ap->add_option("--out", ba.out, "output token file")->required();
  bpe_ap->callback([&]() {
    run_bpe_apply(ba.model, ba.units, ba.out, Meta{echo, std::nullopt});
  });

  // lm-train ----------------------------------------------------------------
  auto* lm_tr = app.add_subcommand(
      "lm-train", "train an n-gram language model on token sequences");
  struct {
    std::string tokens, out_model;
    int32_t order = 3;
    std::string smoothing = "witten_bell";
    bool include_eos = true;
  } lt;
  lm_tr->add_option("--tokens", lt.tokens, "token file from bpe-apply")
      ->required();
  lm_tr->add_option("--out-model", lt.out_model, "output model file")
      ->required();
  lm_tr->add_option("--order", lt.order, "n-gram order")->capture_default_str();
  lm_tr->add_option("--smoothing", lt.smoothing, "witten_bell or mle")
      ->capture_default_str();
  lm_tr->add_flag("--include-eos,!--no-include-eos", lt.include_eos,
                  "model sequence termination (default on)");
  lm_tr->callback([&]() {
    run_lm_train(lt.tokens, lt.out_model, lt.order, lt.smoothing,
                 lt.include_eos, Meta{echo, std::nullopt});
  });

  // score -------------------------------------------------------------------
  auto* score = app.add_subcommand(
      "score", "attach one score per utterance (ppl, duration, combined_loss)");
  struct {
    std::string kind;
    std::string manifest, units, bpe_model, lm_model, out, unk_rate_out;
    std::string masked, unmasked;
    double alpha = 0.5;
    int32_t cluster_count = 0;
    int32_t workers = 0;  // 0 = SUBSEL_WORKERS or 1
  } sc;
  score->add_option("--kind", sc.kind, "ppl, duration or combined_loss")
      ->required();
  score->add_option("--manifest", sc.manifest, "pool manifest");
  score->add_option("--units", sc.units, "raw units file (ppl only)");
  score->add_option("--cluster-count", sc.cluster_count,
                    "unit alphabet size K (ppl only)");
  score->add_option("--bpe-model", sc.bpe_model, "model from bpe-train");
  score->add_option("--lm-model", sc.lm_model, "model from lm-train");
  score->add_option("--masked", sc.masked,
                    "masked-loss score file (combined_loss only)");
  score->add_option("--unmasked", sc.unmasked,
                    "unmasked-loss score file (combined_loss only)");
  score->add_option("--alpha", sc.alpha,
                    "weight on the masked loss (combined_loss only)")
      ->capture_default_str();
  score->add_option("--out", sc.out, "output score file")->required();
  score->add_option("--unk-rate-out", sc.unk_rate_out,
                    "also write per-utterance unknown-token rates (ppl only)");
  score->add_option("--workers", sc.workers,
                    "scoring threads (default: SUBSEL_WORKERS or 1)");
  score->callback([&]() {
    const Meta meta{echo, std::nullopt};
    const auto require = [](const std::string& value, const char* flag) {
      if (value.empty())
        throw UsageError(std::string("this score kind requires ") + flag);
    };
    if (sc.kind == kScorePpl) {
      require(sc.manifest, "--manifest");
      require(sc.units, "--units");
      require(sc.bpe_model, "--bpe-model");
      require(sc.lm_model, "--lm-model");
      if (sc.cluster_count <= 0)
        throw UsageError("this score kind requires --cluster-count");
      const int32_t workers = sc.workers > 0 ? sc.workers : env_workers();
      run_score_ppl(sc.manifest, sc.units, sc.cluster_count, sc.bpe_model,
                    sc.lm_model, sc.out,
                    sc.unk_rate_out.empty()
                        ? std::nullopt
                        : std::optional<fs::path>(sc.unk_rate_out),
                    workers, meta);
    } else if (sc.kind == kScoreDuration) {
      require(sc.manifest, "--manifest");
      const CorpusPool pool = load_manifest(sc.manifest, std::nullopt, 1);
      const ScoreTable table = score_duration(pool);
      write_score_file(sc.out, {table.entries.begin(), table.entries.end()},
                       meta);
      note("score: " + std::to_string(table.entries.size()) +
           " utterances scored (duration)");
    } else if (sc.kind == kScoreCombinedLoss) {
      require(sc.masked, "--masked");
      require(sc.unmasked, "--unmasked");
      const ScoreTable table = combine_pretrain_loss_tables(
          load_score_table(sc.masked, kScoreMaskedLoss),
          load_score_table(sc.unmasked, kScoreUnmaskedLoss), sc.alpha);
      write_score_file(sc.out, {table.entries.begin(), table.entries.end()},
                       meta);
      note("score: " + std::to_string(table.entries.size()) +
           " utterances scored (combined_loss, alpha " +
           format_double(sc.alpha) + ")");
    } else {
      throw UsageError("unknown score kind \"" + sc.kind +
                       "\" (ppl, duration or combined_loss)");
    }
  });

  // select ------------------------------------------------------------------
  auto* select = app.add_subcommand(
      "select", "draw budgeted replicate subsets under a criterion");
  struct {
    std::string manifest, scores, out_prefix;
  } se;
  SelectKnobs se_knobs;
  select->add_option("--manifest", se.manifest, "pool manifest")->required();
  select->add_option("--scores", se.scores,
                     "score file (required by score criteria)");
  select->add_option("--out-prefix", se.out_prefix,
                     "writes <prefix>_r<i>.ids (+ .json) and "
                     "<prefix>_summary.tsv")
      ->required();
  add_select_knobs(select, se_knobs, /*with_score_kind=*/true);
  select->callback([&]() {
    const SelectionSpec spec = build_selection_spec(se_knobs);
    run_select(se.manifest,
               se.scores.empty() ? std::nullopt
                                 : std::optional<fs::path>(se.scores),
               spec, se_knobs.replicates, se.out_prefix,
               Meta{echo, se_knobs.seed});
  });

  // stats -------------------------------------------------------------------
  auto* stats = app.add_subcommand(
      "stats", "diversity and score aggregates for subsets (or the pool)");
  struct {
    std::string manifest, scores, out;
    std::string score_kind = kScorePpl;
    std::vector<std::string> subsets;
  } st;
  stats->add_option("--manifest", st.manifest, "pool manifest")->required();
  stats->add_option("--subset", st.subsets,
                    "subset ids file; repeatable; omit for the whole pool");
  stats->add_option("--scores", st.scores, "score file to average");
  stats->add_option("--score-kind", st.score_kind, "name for --scores values")
      ->capture_default_str();
  stats->add_option("--out", st.out, "output TSV (default: stdout)");
  stats->callback([&]() {
    run_stats(st.manifest,
              st.scores.empty() ? std::nullopt
                                : std::optional<fs::path>(st.scores),
              st.score_kind, st.subsets,
              st.out.empty() ? std::nullopt : std::optional<fs::path>(st.out),
              Meta{echo, std::nullopt});
  });

  // correlate ---------------------------------------------------------------
  auto* corr = app.add_subcommand(
      "correlate", "pairwise Pearson correlations between table columns");
  struct {
    std::string table, out;
    std::vector<std::string> columns;
  } co;
  corr->add_option("--table", co.table, "TSV with a header row (e.g. a "
                   "summary from select or stats)")
      ->required();
  corr->add_option("--columns", co.columns,
                   "column names to correlate (default: all numeric columns)")
      ->delimiter(',');
  corr->add_option("--out", co.out, "output TSV (default: stdout)");
  corr->callback([&]() {
    run_correlate(co.table, co.columns,
                  co.out.empty() ? std::nullopt
                                 : std::optional<fs::path>(co.out),
                  Meta{echo, std::nullopt});
  });

  // werr --------------------------------------------------------------------
  auto* werr = app.add_subcommand(
      "werr", "relative word-error-rate reduction versus a baseline");
  struct {
    double baseline = 0.0;
    double wer = 0.0;
    std::string wer_file, check, out, box_out;
    double tolerance_pp = kWerrCheckTolerancePp;
  } we;
  auto* we_baseline =
      werr->add_option("--baseline", we.baseline, "baseline WER in percent");
  auto* we_wer = werr->add_option("--wer", we.wer, "one candidate WER");
  werr->add_option("--wer-file", we.wer_file,
                   "TSV with a `label wer` header, one WERR per row");
  werr->add_option("--check", we.check,
                   "table `label baseline_wer stated_wer stated_werr`; "
                   "recompute and flag discrepancies");
  werr->add_option("--tolerance-pp", we.tolerance_pp,
                   "flag threshold for --check, percentage points")
      ->capture_default_str();
  werr->add_option("--out", we.out, "output TSV (default: stdout)");
  werr->add_option("--box-out", we.box_out,
                   "box summary of the WERR values (--wer-file only)");
  werr->callback([&]() {
    const Meta meta{echo, std::nullopt};
    const auto out_path = we.out.empty() ? std::nullopt
                                         : std::optional<fs::path>(we.out);
    const int modes = (we_wer->count() > 0 ? 1 : 0) +
                      (we.wer_file.empty() ? 0 : 1) +
                      (we.check.empty() ? 0 : 1);
    if (modes != 1)
      throw UsageError("pass exactly one of --wer, --wer-file, --check");
    if (!we.check.empty()) {
      run_werr_check(we.check, we.tolerance_pp, out_path, meta);
      return;
    }
    if (we_baseline->count() == 0)
      throw UsageError("--baseline is required with --wer and --wer-file");

    std::ofstream file;
    std::ostream* os = &std::cout;
    if (out_path) {
      file = open_output(*out_path);
      os = &file;
    }
    write_meta_header(*os, meta);
    if (we_wer->count() > 0) {
      *os << "werr_percent\t" << format_double(werr_percent(we.baseline, we.wer))
          << "\n";
    } else {
      *os << "label\twer\twerr_percent\n";
      std::vector<double> werrs;
      for (const auto& [label, wer] : read_wer_table(we.wer_file)) {
        const double v = werr_percent(we.baseline, wer);
        werrs.push_back(v);
        *os << label << '\t' << format_double(wer) << '\t' << format_double(v)
            << "\n";
      }
      if (!we.box_out.empty()) {
        const BoxSummary box = box_stats(werrs);
        std::ofstream bos = open_output(we.box_out);
        write_meta_header(bos, meta);
        bos << "stat\tvalue\n"
            << "mean\t" << format_double(box.mean) << "\n"
            << "median\t" << format_double(box.median) << "\n"
            << "min\t" << format_double(box.min) << "\n"
            << "max\t" << format_double(box.max) << "\n"
            << "p25\t" << format_double(box.p25) << "\n"
            << "p75\t" << format_double(box.p75) << "\n";
        if (!bos) throw DataError("failed writing " + we.box_out);
      }
    }
    if (out_path && !file)
      throw DataError("failed writing " + out_path->string());
  });

  // synth -------------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "generate a synthetic pool with known structure");
  struct {
    std::string preset = "standard";
    uint64_t seed = 1;
    std::string out_manifest, out_units;
    int32_t n_speakers = 0, n_books = 0, n_utts = 0, cluster_count = 0;
    double noise_prob = 0.0, duration_mean = 0.0, duration_jitter = 0.0;
  } sy;
  synth->add_option("--preset", sy.preset, "standard or stress")
      ->capture_default_str();
  synth->add_option("--seed", sy.seed, "generator seed")->capture_default_str();
  synth->add_option("--out-manifest", sy.out_manifest, "output manifest")
      ->required();
  synth->add_option("--out-units", sy.out_units, "output units file")
      ->required();
  auto* sy_spk = synth->add_option("--n-speakers", sy.n_speakers);
  auto* sy_books = synth->add_option("--n-books", sy.n_books);
  auto* sy_utts = synth->add_option("--n-utts", sy.n_utts);
  auto* sy_k = synth->add_option("--cluster-count", sy.cluster_count);
  auto* sy_noise = synth->add_option("--noise-prob", sy.noise_prob);
  auto* sy_mean = synth->add_option("--duration-mean", sy.duration_mean);
  auto* sy_jitter = synth->add_option("--duration-jitter", sy.duration_jitter);
  synth->callback([&]() {
    SynthConfig cfg;
    if (sy.preset == "standard") {
      cfg = standard_synth_config(sy.seed);
    } else if (sy.preset == "stress") {
      cfg = stress_synth_config(sy.seed);
    } else {
      throw UsageError("preset must be standard or stress, got \"" +
                       sy.preset + "\"");
    }
    if (sy_spk->count() > 0) cfg.n_speakers = sy.n_speakers;
    if (sy_books->count() > 0) cfg.n_books = sy.n_books;
    if (sy_utts->count() > 0) cfg.n_utts = sy.n_utts;
    if (sy_k->count() > 0) cfg.cluster_count = sy.cluster_count;
    if (sy_noise->count() > 0) cfg.unit_noise_prob = sy.noise_prob;
    if (sy_mean->count() > 0) cfg.duration_mean_sec = sy.duration_mean;
    if (sy_jitter->count() > 0) cfg.duration_jitter_sec = sy.duration_jitter;

    const SynthCorpus corpus = generate_corpus(cfg);
    save_manifest(corpus.pool, sy.out_manifest, fs::path(sy.out_units),
                  Meta{echo, sy.seed});
    note("synth: " + std::to_string(corpus.pool.size()) + " utterances, " +
         format_double(corpus.pool.total_duration_sec() / 3600.0) + " h, " +
         std::to_string(cfg.n_speakers) + " speakers, " +
         std::to_string(cfg.n_books) + " books");
  });

  // pipeline ----------------------------------------------------------------
  auto* pipe = app.add_subcommand(
      "pipeline",
      "rle -> bpe-train -> bpe-apply -> lm-train -> score -> select -> stats");
  struct {
    std::string manifest, units, workdir;
    int32_t cluster_count = 0;
    int32_t vocab_size = 5000;
    int32_t lm_order = 3;
    std::string smoothing = "witten_bell";
    bool include_eos = true;
    int32_t workers = 0;
  } pl;
  SelectKnobs pl_knobs;
  pipe->add_option("--manifest", pl.manifest, "pool manifest")->required();
  pipe->add_option("--units", pl.units, "raw units file")->required();
  pipe->add_option("--cluster-count", pl.cluster_count,
                   "unit alphabet size K")
      ->required();
  pipe->add_option("--workdir", pl.workdir,
                   "directory for intermediate and final artifacts")
      ->required();
  pipe->add_option("--vocab-size", pl.vocab_size, "byte-pair token count")
      ->capture_default_str();
  pipe->add_option("--lm-order", pl.lm_order, "n-gram order")
      ->capture_default_str();
  pipe->add_option("--smoothing", pl.smoothing, "witten_bell or mle")
      ->capture_default_str();
  pipe->add_flag("--include-eos,!--no-include-eos", pl.include_eos,
                 "model sequence termination (default on)");
  pipe->add_option("--workers", pl.workers,
                   "scoring threads (default: SUBSEL_WORKERS or 1)");
  add_select_knobs(pipe, pl_knobs, /*with_score_kind=*/false);
  pipe->callback([&]() {
    const Meta meta{echo, pl_knobs.seed};
    const SelectionSpec spec = build_selection_spec(pl_knobs);
    const int32_t workers = pl.workers > 0 ? pl.workers : env_workers();
    const fs::path wd = pl.workdir;
    fs::create_directories(wd);

    run_rle(pl.units, wd / "rle.units", meta);
    run_bpe_train(wd / "rle.units", wd / "bpe.model", pl.vocab_size,
                  pl.cluster_count, meta);
    run_bpe_apply(wd / "bpe.model", wd / "rle.units", wd / "tokens.units",
                  meta);
    run_lm_train(wd / "tokens.units", wd / "lm.model", pl.lm_order,
                 pl.smoothing, pl.include_eos, meta);
    run_score_ppl(pl.manifest, pl.units, pl.cluster_count, wd / "bpe.model",
                  wd / "lm.model", wd / "scores_ppl.tsv", std::nullopt,
                  workers, meta);
    const std::vector<fs::path> subsets =
        run_select(pl.manifest, wd / "scores_ppl.tsv", spec,
                   pl_knobs.replicates, (wd / "subset").string(), meta);
    std::vector<std::string> subset_paths;
    subset_paths.reserve(subsets.size());
    for (const fs::path& p : subsets) subset_paths.push_back(p.string());
    run_stats(pl.manifest, wd / "scores_ppl.tsv", spec.score_kind,
              subset_paths, wd / "stats.tsv", meta);
    note("pipeline: artifacts in " + wd.string());
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    std::cerr << kToolName << ": usage_error: " << e.what() << "\n";
    return 1;
  } catch (const UsageError& e) {
    std::cerr << kToolName << ": usage_error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << kToolName << ": data_error: " << e.what() << "\n";
    return 2;
  } catch (const InternalError& e) {
    std::cerr << kToolName << ": internal_error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << kToolName << ": internal_error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
