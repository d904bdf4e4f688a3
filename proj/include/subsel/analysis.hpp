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

#ifndef SUBSEL_ANALYSIS_HPP_
#define SUBSEL_ANALYSIS_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "subsel/corpus.hpp"
#include "subsel/scoring.hpp"

namespace subsel {

// Five-number summary plus mean. Quartiles interpolate linearly between the
// two closest sorted ranks (the numpy default); min <= p25 <= median <= p75
// <= max always holds.
struct BoxSummary {
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
};
BoxSummary box_stats(std::vector<double> values);  // DataError on empty input

// Sample Pearson correlation. DataError on length mismatch, fewer than two
// points, or zero variance on either side.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Pairwise correlations between named columns. Cells whose pair is
// degenerate (zero variance) are recorded as NaN instead of aborting the
// whole matrix; the diagonal is exactly 1.
struct CorrelationMatrix {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> values;  // values[i][j], NaN = undefined
};
CorrelationMatrix correlation_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns);

// Relative word error rate reduction versus a baseline, in percent.
// Positive means the candidate improved on the baseline.
double werr_percent(double baseline_wer, double candidate_wer);

// Reported (WER, WERR) pairs are typically rounded to two decimals, so a
// recomputation check only flags discrepancies beyond this tolerance.
inline constexpr double kWerrCheckTolerancePp = 0.05;

struct WerrCheckRow {
  std::string label;
  double baseline_wer = 0.0;
  double stated_wer = 0.0;
  double stated_werr = 0.0;
  double recomputed_werr = 0.0;
  double discrepancy_pp = 0.0;  // |recomputed - stated|
  bool flagged = false;
};
WerrCheckRow check_werr(const std::string& label, double baseline_wer,
                        double stated_wer, double stated_werr,
                        double tolerance_pp = kWerrCheckTolerancePp);

// Diversity and score aggregates of one subset; the row unit of the
// correlation analysis.
struct SubsetStats {
  std::size_t n_utts = 0;
  double total_duration_sec = 0.0;
  std::size_t n_speakers = 0;
  std::size_t n_books = 0;
  // Fraction female among utterances whose gender is known; unset when none.
  std::optional<double> gender_fraction_female;
  // Word stats need transcripts; unset (with a warning upstream) otherwise.
  // Unique words are distinct whitespace-delimited tokens after case-folding.
  std::optional<std::size_t> n_unique_words;
  std::optional<std::size_t> n_total_words;
  // Mean attached score per requested kind, e.g. avg "ppl".
  std::map<std::string, double> avg_scores;
  std::map<std::string, double> split_fractions;  // by source_split
};

// score_kinds lists the score columns to average; an unscored member is a
// DataError naming the id. Missing transcripts leave the word fields unset.
SubsetStats subset_stats(const CorpusPool& pool,
                         const std::vector<std::string>& ids,
                         const std::vector<std::string>& score_kinds = {});

// Student-t machinery for the paired replicate comparisons. The CDF comes
// from the regularized incomplete beta function and the critical value from
// bisection, so no distribution tables are linked in.
double student_t_cdf(double t, double df);
double student_t_critical(double df, double one_sided_level);

// One-sided paired test of mean(x - y) > 0.
struct PairedTTest {
  double t_statistic = 0.0;
  double df = 0.0;
  double critical = 0.0;  // at the requested one-sided level
  bool significant = false;
};
PairedTTest paired_t_test_greater(const std::vector<double>& x,
                                  const std::vector<double>& y,
                                  double one_sided_level = 0.95);

}  // namespace subsel

#endif  // SUBSEL_ANALYSIS_HPP_
