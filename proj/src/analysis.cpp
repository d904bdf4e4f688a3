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

#include "subsel/analysis.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_set>

#include "subsel/error.hpp"
#include "subsel/textio.hpp"

namespace subsel {

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  // Linear interpolation between the two closest ranks: position q*(n-1).
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<size_t>(std::floor(pos));
  const auto hi = static_cast<size_t>(std::ceil(pos));
  const double frac = pos - std::floor(pos);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

std::string fold_case(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation
// (Lentz's method, as in Numerical Recipes).
double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const auto md = static_cast<double>(m);
    const double m2 = 2.0 * md;
    double aa = md * (b - md) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + md) * (qab + md) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace

BoxSummary box_stats(std::vector<double> values) {
  if (values.empty()) throw DataError("box_stats: empty value list");
  std::sort(values.begin(), values.end());

  BoxSummary s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.min = values.front();
  s.max = values.back();
  s.median = quantile_sorted(values, 0.5);
  s.p25 = quantile_sorted(values, 0.25);
  s.p75 = quantile_sorted(values, 0.75);
  return s;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size())
    throw DataError("pearson: length mismatch (" + std::to_string(x.size()) +
                    " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 2) throw DataError("pearson: need at least 2 points");

  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0)
    throw DataError("pearson: zero variance input");
  return sxy / std::sqrt(sxx * syy);
}

CorrelationMatrix correlation_matrix(
    const std::vector<std::pair<std::string, std::vector<double>>>& columns) {
  if (columns.size() < 2)
    throw DataError("correlation_matrix: need at least 2 columns");
  const size_t rows = columns.front().second.size();
  if (rows < 2) throw DataError("correlation_matrix: need at least 2 rows");
  for (const auto& [label, values] : columns)
    if (values.size() != rows)
      throw DataError("correlation_matrix: column \"" + label +
                      "\" has " + std::to_string(values.size()) +
                      " rows, expected " + std::to_string(rows));

  CorrelationMatrix m;
  m.labels.reserve(columns.size());
  for (const auto& [label, values] : columns) m.labels.push_back(label);
  m.values.assign(columns.size(),
                  std::vector<double>(columns.size(), 0.0));
  for (size_t i = 0; i < columns.size(); ++i) {
    m.values[i][i] = 1.0;
    for (size_t j = i + 1; j < columns.size(); ++j) {
      double r = std::numeric_limits<double>::quiet_NaN();
      try {
        r = pearson(columns[i].second, columns[j].second);
      } catch (const DataError&) {
        // Degenerate pair; the cell stays undefined rather than failing
        // the whole matrix.
      }
      m.values[i][j] = r;
      m.values[j][i] = r;
    }
  }
  return m;
}

double werr_percent(double baseline_wer, double candidate_wer) {
  if (!(baseline_wer > 0.0))
    throw DataError("werr: baseline WER must be positive");
  return 100.0 * (baseline_wer - candidate_wer) / baseline_wer;
}

WerrCheckRow check_werr(const std::string& label, double baseline_wer,
                        double stated_wer, double stated_werr,
                        double tolerance_pp) {
  WerrCheckRow row;
  row.label = label;
  row.baseline_wer = baseline_wer;
  row.stated_wer = stated_wer;
  row.stated_werr = stated_werr;
  row.recomputed_werr = werr_percent(baseline_wer, stated_wer);
  row.discrepancy_pp = std::fabs(row.recomputed_werr - stated_werr);
  row.flagged = row.discrepancy_pp > tolerance_pp;
  return row;
}

SubsetStats subset_stats(const CorpusPool& pool,
                         const std::vector<std::string>& ids,
                         const std::vector<std::string>& score_kinds) {
  SubsetStats stats;
  stats.n_utts = ids.size();

  std::unordered_set<std::string> seen;
  std::set<std::string> speakers, books;
  std::set<std::string> unique_words;
  size_t total_words = 0;
  size_t known_gender = 0, female = 0;
  bool all_transcribed = true;
  std::map<std::string, double> score_sums;
  std::map<std::string, size_t> split_counts;

  for (const std::string& id : ids) {
    if (!seen.insert(id).second)
      throw DataError("duplicate id \"" + id + "\" in subset");
    const Utterance& u = pool.at(id);
    stats.total_duration_sec += u.duration_sec;
    speakers.insert(u.speaker_id);
    books.insert(u.book_id);
    if (u.gender != Gender::kUnknown) {
      ++known_gender;
      if (u.gender == Gender::kFemale) ++female;
    }
    if (u.source_split) ++split_counts[*u.source_split];
    if (u.transcript) {
      for (std::string_view w : split_ws(*u.transcript)) {
        unique_words.insert(fold_case(w));
        ++total_words;
      }
    } else {
      all_transcribed = false;
    }
    for (const std::string& kind : score_kinds) {
      const auto it = u.scores.find(kind);
      if (it == u.scores.end())
        throw DataError("utterance \"" + id + "\" has no score of kind \"" +
                        kind + "\"");
      score_sums[kind] += it->second;
    }
  }

  stats.n_speakers = speakers.size();
  stats.n_books = books.size();
  if (known_gender > 0)
    stats.gender_fraction_female =
        static_cast<double>(female) / static_cast<double>(known_gender);
  if (all_transcribed && !ids.empty()) {
    stats.n_unique_words = unique_words.size();
    stats.n_total_words = total_words;
  }
  if (!ids.empty()) {
    for (const auto& [kind, sum] : score_sums)
      stats.avg_scores[kind] = sum / static_cast<double>(ids.size());
  }
  // Fractions are over all subset members, so unlabeled utterances dilute
  // every split; sets with no labels at all get an empty map.
  for (const auto& [split, count] : split_counts)
    stats.split_fractions[split] =
        static_cast<double>(count) / static_cast<double>(ids.size());
  return stats;
}

double student_t_cdf(double t, double df) {
  if (!(df > 0.0)) throw UsageError("student_t_cdf: df must be positive");
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double x = df / (df + t * t);
  const double tail = 0.5 * reg_inc_beta(df / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - tail : tail;
}

double student_t_critical(double df, double one_sided_level) {
  if (!(one_sided_level > 0.0 && one_sided_level < 1.0))
    throw UsageError("student_t_critical: level must lie in (0, 1)");
  // cdf is monotone in t; bisect on a bracket wide enough for any df >= 1
  // and level up to 1 - 1e-12.
  double lo = -1e8, hi = 1e8;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < one_sided_level)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

PairedTTest paired_t_test_greater(const std::vector<double>& x,
                                  const std::vector<double>& y,
                                  double one_sided_level) {
  if (x.size() != y.size())
    throw DataError("paired t test: length mismatch");
  if (x.size() < 2) throw DataError("paired t test: need at least 2 pairs");

  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (size_t i = 0; i < x.size(); ++i) mean += x[i] - y[i];
  mean /= n;
  double ss = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double d = (x[i] - y[i]) - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (n - 1.0));

  PairedTTest test;
  test.df = n - 1.0;
  test.critical = student_t_critical(test.df, one_sided_level);
  if (sd == 0.0) {
    // All differences identical: the direction is exact, not sampled.
    test.t_statistic = mean > 0.0
                           ? std::numeric_limits<double>::infinity()
                           : mean < 0.0
                                 ? -std::numeric_limits<double>::infinity()
                                 : 0.0;
  } else {
    test.t_statistic = mean / (sd / std::sqrt(n));
  }
  test.significant = test.t_statistic > test.critical;
  return test;
}

}  // namespace subsel
