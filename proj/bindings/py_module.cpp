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

// Python bindings for the main operations: load or synthesize a pool, fit
// and apply the perplexity scorer, select budgeted subsets, and run the
// small analysis helpers. Exceptions map to ValueError (usage),
// RuntimeError (data) and AssertionError (internal invariants).

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <string>
#include <vector>

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
#include "subsel/version.hpp"

namespace py = pybind11;

namespace subsel {
namespace {

SelectionSpec make_spec(const std::string& criterion, double budget_sec,
                        uint64_t seed, std::optional<int32_t> num_speakers,
                        std::optional<int32_t> num_books,
                        const std::string& gender,
                        const std::string& score_kind, std::optional<double> p,
                        bool stratify_cover_all) {
  SelectionSpec spec;
  const auto c = parse_criterion(criterion);
  if (!c) throw UsageError("unknown criterion \"" + criterion + "\"");
  spec.criterion = *c;
  spec.budget_sec = budget_sec;
  spec.seed = seed;
  spec.num_speakers = num_speakers;
  spec.num_books = num_books;
  spec.gender = parse_gender(gender);
  if (spec.gender == Gender::kUnknown)
    throw UsageError("gender must be female or male, got \"" + gender + "\"");
  spec.score_kind = score_kind;
  spec.p = p;
  spec.stratify_cover_all = stratify_cover_all;
  return spec;
}

py::dict stats_dict(const SubsetStats& st) {
  py::dict d;
  d["n_utts"] = st.n_utts;
  d["total_duration_sec"] = st.total_duration_sec;
  d["n_speakers"] = st.n_speakers;
  d["n_books"] = st.n_books;
  d["gender_fraction_female"] = st.gender_fraction_female;
  d["n_unique_words"] = st.n_unique_words;
  d["n_total_words"] = st.n_total_words;
  d["avg_scores"] = st.avg_scores;
  d["split_fractions"] = st.split_fractions;
  return d;
}

}  // namespace
}  // namespace subsel

PYBIND11_MODULE(_core, m) {
  using namespace subsel;

  m.doc() = "budgeted transcription-subset selection over clustered speech units";
  m.attr("__version__") = kVersion;

  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<InternalError>(m, "InternalError", PyExc_AssertionError);

  py::class_<Utterance>(m, "Utterance")
      .def_readonly("id", &Utterance::id)
      .def_readonly("duration_sec", &Utterance::duration_sec)
      .def_readonly("speaker_id", &Utterance::speaker_id)
      .def_readonly("book_id", &Utterance::book_id)
      .def_property_readonly(
          "gender", [](const Utterance& u) { return gender_name(u.gender); })
      .def_readonly("source_split", &Utterance::source_split)
      .def_readonly("transcript", &Utterance::transcript)
      .def_readonly("units", &Utterance::units)
      .def_readonly("scores", &Utterance::scores);

  py::class_<CorpusPool>(m, "Pool")
      .def_property_readonly("cluster_count", &CorpusPool::cluster_count)
      .def_property_readonly("total_duration_sec",
                             &CorpusPool::total_duration_sec)
      .def("__len__", &CorpusPool::size)
      .def("utterances", &CorpusPool::utterances,
           py::return_value_policy::reference_internal)
      .def("utterance", &CorpusPool::at, py::arg("id"),
           py::return_value_policy::reference_internal);

  m.def("load_manifest", &load_manifest, py::arg("manifest_path"),
        py::arg("units_path") = std::nullopt, py::arg("cluster_count") = 1,
        "Load a TSV manifest (and optional units file) into a Pool.");

  m.def(
      "synth_pool",
      [](uint64_t seed, const std::string& preset, std::optional<int32_t> n_utts) {
        SynthConfig cfg;
        if (preset == "standard") {
          cfg = standard_synth_config(seed);
        } else if (preset == "stress") {
          cfg = stress_synth_config(seed);
        } else {
          throw UsageError("preset must be standard or stress");
        }
        if (n_utts) cfg.n_utts = *n_utts;
        return generate_corpus(cfg).pool;
      },
      py::arg("seed") = 1, py::arg("preset") = "standard",
      py::arg("n_utts") = std::nullopt,
      "Generate a synthetic pool with known speaker/book structure.");

  m.def(
      "rle_collapse",
      [](const std::vector<int32_t>& units) { return rle_collapse(units); },
      py::arg("units"), "Collapse runs of identical units to one occurrence.");

  m.def(
      "score_ppl",
      [](const CorpusPool& pool, int32_t bpe_vocab_size, int32_t lm_order,
         int32_t workers) {
        PbpeOptions options;
        options.bpe_vocab_size = bpe_vocab_size;
        options.lm_order = lm_order;
        const PbpeArtifacts art = fit_pbpe(pool, options);
        return score_pbpe(pool, art.bpe, art.lm, nullptr, workers).entries;
      },
      py::arg("pool"), py::arg("bpe_vocab_size") = 5000,
      py::arg("lm_order") = 3, py::arg("workers") = 1,
      "Fit the unit-BPE + n-gram scorer on the pool and return {id: "
      "perplexity}.");

  m.def(
      "select",
      [](const CorpusPool& pool, const std::string& criterion,
         double budget_sec, uint64_t seed, int32_t replicates,
         std::optional<int32_t> num_speakers, std::optional<int32_t> num_books,
         const std::string& gender, const std::string& score_kind,
         std::optional<double> p, bool stratify_cover_all,
         const std::optional<std::map<std::string, double>>& scores) {
        const SelectionSpec spec =
            make_spec(criterion, budget_sec, seed, num_speakers, num_books,
                      gender, score_kind, p, stratify_cover_all);
        std::optional<ScoreTable> table;
        if (scores) {
          table.emplace();
          table->kind = score_kind;
          table->entries = *scores;
        }
        const auto results = replicate_select(pool, spec, replicates,
                                              table ? &*table : nullptr);
        py::list out;
        for (const SubsetResult& r : results) {
          py::dict d;
          d["replicate_index"] = r.replicate_index;
          d["utterance_ids"] = r.utterance_ids;
          d["total_duration_sec"] = r.total_duration_sec;
          out.append(std::move(d));
        }
        return out;
      },
      py::arg("pool"), py::arg("criterion"), py::arg("budget_sec"),
      py::arg("seed") = 1, py::arg("replicates") = 1,
      py::arg("num_speakers") = std::nullopt,
      py::arg("num_books") = std::nullopt, py::arg("gender") = "female",
      py::arg("score_kind") = "ppl", py::arg("p") = std::nullopt,
      py::arg("stratify_cover_all") = false,
      py::arg("scores") = std::nullopt,
      "Draw replicate subsets under a criterion; returns a list of dicts "
      "with pick-order ids and totals.");

  m.def(
      "subset_stats",
      [](const CorpusPool& pool, const std::vector<std::string>& ids,
         const std::optional<std::map<std::string, double>>& scores,
         const std::string& score_kind) {
        if (!scores) return stats_dict(subset_stats(pool, ids));
        CorpusPool scored = pool;
        ScoreTable table;
        table.kind = score_kind;
        table.entries = *scores;
        attach_score_table(scored, table);
        return stats_dict(subset_stats(scored, ids, {score_kind}));
      },
      py::arg("pool"), py::arg("ids"), py::arg("scores") = std::nullopt,
      py::arg("score_kind") = "ppl",
      "Diversity and score aggregates for one subset of the pool.");

  m.def(
      "box_stats",
      [](std::vector<double> values) {
        const BoxSummary b = box_stats(std::move(values));
        py::dict d;
        d["mean"] = b.mean;
        d["median"] = b.median;
        d["min"] = b.min;
        d["max"] = b.max;
        d["p25"] = b.p25;
        d["p75"] = b.p75;
        return d;
      },
      py::arg("values"), "Five-number summary plus mean.");

  m.def("pearson", &pearson, py::arg("x"), py::arg("y"),
        "Sample Pearson correlation.");

  m.def("werr_percent", &werr_percent, py::arg("baseline_wer"),
        py::arg("candidate_wer"),
        "Relative word-error-rate reduction versus a baseline, in percent.");

  m.def(
      "proxy_quality",
      [](const CorpusPool& pool, const std::vector<std::string>& ids) {
        return proxy_quality(pool, ids);
      },
      py::arg("pool"), py::arg("subset_ids"),
      "Fraction of the pool's unique transcript words covered by the subset.");
}
