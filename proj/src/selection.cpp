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

#include "subsel/selection.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "subsel/error.hpp"
#include "subsel/rng.hpp"
#include "subsel/version.hpp"

#include "json.hpp"

namespace subsel {

namespace {

struct CriterionName {
  Criterion criterion;
  const char* name;
};
constexpr CriterionName kCriterionNames[] = {
    {Criterion::kPureRandom, "pure_random"},
    {Criterion::kGenderRestricted, "gender_restricted"},
    {Criterion::kDurationTailLong, "duration_tail_long"},
    {Criterion::kDurationTailShort, "duration_tail_short"},
    {Criterion::kDurationMiddle, "duration_middle"},
    {Criterion::kSpeakerDiverse, "speaker_diverse"},
    {Criterion::kBookDiverse, "book_diverse"},
    {Criterion::kScoreHead, "score_head"},
    {Criterion::kScoreTail, "score_tail"},
    {Criterion::kScoreMiddle, "score_middle"},
    {Criterion::kScoreTailSpeakerStrat, "score_tail_speaker_stratified"},
    {Criterion::kScoreTailBookStrat, "score_tail_book_stratified"},
};

// Distinct values of `key` over the pool, ascending, then a seeded draw of
// the first `want`. Entity-level choice: every speaker/book is equally
// likely no matter how much audio it carries.
std::vector<std::string> draw_entities(const CorpusPool& pool,
                                       const std::string& (*key)(const Utterance&),
                                       int32_t want, const char* what, Rng& rng) {
  std::set<std::string> distinct;
  for (const Utterance& u : pool.utterances()) distinct.insert(key(u));
  if (want <= 0) throw UsageError(std::string(what) + " count must be positive");
  if (static_cast<size_t>(want) > distinct.size())
    throw DataError("requested " + std::to_string(want) + " " + what +
                    "(s), pool has only " + std::to_string(distinct.size()));
  std::vector<std::string> order(distinct.begin(), distinct.end());
  rng.shuffle(order);
  order.resize(static_cast<size_t>(want));
  return order;
}

const std::string& speaker_key(const Utterance& u) { return u.speaker_id; }
const std::string& book_key(const Utterance& u) { return u.book_id; }

}  // namespace

const char* criterion_name(Criterion c) {
  for (const auto& [criterion, name] : kCriterionNames)
    if (criterion == c) return name;
  return "?";
}

std::optional<Criterion> parse_criterion(const std::string& name) {
  for (const auto& [criterion, cname] : kCriterionNames)
    if (name == cname) return criterion;
  return std::nullopt;
}

std::vector<Criterion> all_criteria() {
  std::vector<Criterion> out;
  for (const auto& [criterion, name] : kCriterionNames) out.push_back(criterion);
  return out;
}

bool criterion_uses_scores(Criterion c) {
  switch (c) {
    case Criterion::kScoreHead:
    case Criterion::kScoreTail:
    case Criterion::kScoreMiddle:
    case Criterion::kScoreTailSpeakerStrat:
    case Criterion::kScoreTailBookStrat:
      return true;
    default:
      return false;
  }
}

bool criterion_is_stratified(Criterion c) {
  return c == Criterion::kScoreTailSpeakerStrat ||
         c == Criterion::kScoreTailBookStrat;
}

double effective_percentile(const SelectionSpec& spec) {
  if (spec.p) {
    if (!(*spec.p > 0.0 && *spec.p <= 1.0))
      throw UsageError("percentile p must lie in (0, 1]");
    return *spec.p;
  }
  if (spec.criterion == Criterion::kDurationMiddle ||
      spec.criterion == Criterion::kScoreMiddle)
    return 0.40;
  return 0.15;
}

SubsetResult select_subset(const CorpusPool& pool, const SelectionSpec& spec,
                           const ScoreTable* scores) {
  if (!(spec.budget_sec > 0.0)) throw UsageError("budget must be positive");
  if (pool.size() == 0) throw DataError("selection pool is empty");

  Rng rng(spec.seed);

  // Step 1: the eligible candidate set, as sorted ids.
  std::vector<std::string> eligible;
  const auto require_scores = [&]() -> const ScoreTable& {
    if (scores == nullptr)
      throw DataError("criterion " + std::string(criterion_name(spec.criterion)) +
                      " requires scores, none attached");
    if (scores->kind != spec.score_kind)
      throw DataError("criterion wants score kind \"" + spec.score_kind +
                      "\", table has \"" + scores->kind + "\"");
    return *scores;
  };

  switch (spec.criterion) {
    case Criterion::kPureRandom: {
      for (const Utterance& u : pool.utterances()) eligible.push_back(u.id);
      break;
    }
    case Criterion::kGenderRestricted: {
      if (!spec.num_speakers)
        throw UsageError("gender_restricted requires num_speakers");
      if (spec.gender == Gender::kUnknown)
        throw UsageError("gender_restricted requires an explicit gender");
      std::set<std::string> speakers;
      for (const Utterance& u : pool.utterances())
        if (u.gender == spec.gender) speakers.insert(u.speaker_id);
      if (static_cast<size_t>(*spec.num_speakers) > speakers.size())
        throw DataError("requested " + std::to_string(*spec.num_speakers) +
                        " speaker(s) of gender " +
                        std::string(gender_name(spec.gender)) +
                        ", pool has only " + std::to_string(speakers.size()));
      std::vector<std::string> order(speakers.begin(), speakers.end());
      rng.shuffle(order);
      order.resize(static_cast<size_t>(*spec.num_speakers));
      const std::set<std::string> chosen(order.begin(), order.end());
      for (const Utterance& u : pool.utterances())
        if (u.gender == spec.gender && chosen.count(u.speaker_id))
          eligible.push_back(u.id);
      break;
    }
    case Criterion::kSpeakerDiverse:
    case Criterion::kBookDiverse: {
      const bool by_speaker = spec.criterion == Criterion::kSpeakerDiverse;
      const auto& want = by_speaker ? spec.num_speakers : spec.num_books;
      if (!want)
        throw UsageError(std::string(criterion_name(spec.criterion)) +
                         " requires " + (by_speaker ? "num_speakers" : "num_books"));
      const std::vector<std::string> chosen =
          draw_entities(pool, by_speaker ? speaker_key : book_key, *want,
                        by_speaker ? "speaker" : "book", rng);
      const std::set<std::string> chosen_set(chosen.begin(), chosen.end());
      for (const Utterance& u : pool.utterances())
        if (chosen_set.count(by_speaker ? u.speaker_id : u.book_id))
          eligible.push_back(u.id);
      break;
    }
    case Criterion::kDurationTailLong:
    case Criterion::kDurationTailShort:
    case Criterion::kDurationMiddle: {
      const ScoreTable durations = score_duration(pool);
      const Region region = spec.criterion == Criterion::kDurationTailLong
                                ? Region::kTail
                                : spec.criterion == Criterion::kDurationTailShort
                                      ? Region::kHead
                                      : Region::kMiddle;
      eligible = percentile_partition(durations, pool, region,
                                      effective_percentile(spec));
      break;
    }
    case Criterion::kScoreHead:
    case Criterion::kScoreTail:
    case Criterion::kScoreMiddle: {
      const Region region = spec.criterion == Criterion::kScoreHead
                                ? Region::kHead
                                : spec.criterion == Criterion::kScoreTail
                                      ? Region::kTail
                                      : Region::kMiddle;
      eligible = percentile_partition(require_scores(), pool, region,
                                      effective_percentile(spec));
      break;
    }
    case Criterion::kScoreTailSpeakerStrat:
    case Criterion::kScoreTailBookStrat: {
      eligible = percentile_partition(require_scores(), pool, Region::kTail,
                                      effective_percentile(spec));
      break;
    }
  }

  double eligible_duration = 0.0;
  for (const std::string& id : eligible)
    eligible_duration += pool.at(id).duration_sec;
  if (eligible_duration < spec.budget_sec)
    throw DataError(
        "eligible duration " + format_double(eligible_duration) +
        "s cannot meet budget " + format_double(spec.budget_sec) +
        "s (short by " +
        format_double(spec.budget_sec - eligible_duration) + "s)");

  // Step 2: draw until the budget is first reached. The crossing utterance
  // stays in, so the total overshoots by less than one utterance.
  SubsetResult result;
  result.spec = spec;

  const auto take = [&](const std::string& id) -> bool {
    result.utterance_ids.push_back(id);
    result.total_duration_sec += pool.at(id).duration_sec;
    return result.total_duration_sec >= spec.budget_sec;
  };

  if (!criterion_is_stratified(spec.criterion)) {
    rng.shuffle(eligible);
    for (const std::string& id : eligible)
      if (take(id)) break;
  } else {
    // Round-robin over strata: strata shuffled once, members within each
    // stratum shuffled once, then cycled so every stratum in the tail
    // contributes before any stratum repeats.
    const bool by_speaker = spec.criterion == Criterion::kScoreTailSpeakerStrat;
    std::map<std::string, std::vector<std::string>> strata;
    for (const std::string& id : eligible) {
      const Utterance& u = pool.at(id);
      strata[by_speaker ? u.speaker_id : u.book_id].push_back(id);
    }
    std::vector<std::string> stratum_order;
    stratum_order.reserve(strata.size());
    for (const auto& [key, members] : strata) stratum_order.push_back(key);
    rng.shuffle(stratum_order);
    for (const std::string& key : stratum_order) rng.shuffle(strata[key]);

    bool done = false;
    for (size_t round = 0; !done; ++round) {
      bool any = false;
      for (const std::string& key : stratum_order) {
        const auto& members = strata[key];
        if (round >= members.size()) continue;
        any = true;
        if (take(members[round])) {
          done = true;
          break;
        }
      }
      // Exhaustion below budget can only be summation-order rounding, since
      // the eligible total was checked upfront.
      if (!any) break;
    }

    if (spec.stratify_cover_all) {
      const std::set<std::string> picked(result.utterance_ids.begin(),
                                         result.utterance_ids.end());
      for (const auto& [key, members] : strata) {
        const bool covered = std::any_of(
            members.begin(), members.end(),
            [&](const std::string& id) { return picked.count(id) > 0; });
        if (!covered)
          throw DataError("budget exhausted before stratum \"" + key +
                          "\" contributed; " +
                          std::to_string(strata.size()) +
                          " strata present in the score tail");
      }
    }
  }

  // The tolerance covers summation-order rounding when the budget equals
  // the eligible total exactly (then every eligible utterance was taken).
  internal_check(result.total_duration_sec >= spec.budget_sec - 1e-6,
                 "selection ended below budget");
  return result;
}

std::vector<SubsetResult> replicate_select(const CorpusPool& pool,
                                           const SelectionSpec& spec,
                                           int32_t n,
                                           const ScoreTable* scores) {
  if (n < 1) throw UsageError("replicate count must be >= 1");
  std::vector<SubsetResult> results;
  results.reserve(static_cast<size_t>(n));
  for (int32_t i = 0; i < n; ++i) {
    SelectionSpec derived = spec;
    derived.seed = derive_seed(spec.seed, static_cast<uint64_t>(i));
    try {
      SubsetResult r = select_subset(pool, derived, scores);
      r.replicate_index = i;
      results.push_back(std::move(r));
    } catch (const DataError& e) {
      throw DataError("replicate " + std::to_string(i) + ": " + e.what());
    }
  }
  return results;
}

void save_subset(const SubsetResult& result,
                 const std::filesystem::path& ids_path, const Meta& meta) {
  {
    std::ofstream out = open_output(ids_path);
    write_meta_header(out, meta);
    for (const std::string& id : result.utterance_ids) out << id << "\n";
    if (!out) throw DataError("failed writing " + ids_path.string());
  }

  nlohmann::ordered_json j;
  j["meta"] = {{"tool", kToolName}, {"version", kVersion}};
  if (!meta.args.empty()) j["meta"]["args"] = meta.args;
  j["criterion"] = criterion_name(result.spec.criterion);
  j["budget_sec"] = result.spec.budget_sec;
  j["seed"] = result.spec.seed;
  j["replicate_index"] = result.replicate_index;
  nlohmann::ordered_json params;
  if (result.spec.num_speakers) params["num_speakers"] = *result.spec.num_speakers;
  if (result.spec.num_books) params["num_books"] = *result.spec.num_books;
  if (result.spec.criterion == Criterion::kGenderRestricted)
    params["gender"] = gender_name(result.spec.gender);
  if (criterion_uses_scores(result.spec.criterion))
    params["score_kind"] = result.spec.score_kind;
  params["p"] = effective_percentile(result.spec);
  params["stratify_cover_all"] = result.spec.stratify_cover_all;
  j["params"] = std::move(params);
  j["n_utts"] = result.utterance_ids.size();
  j["total_duration_sec"] = result.total_duration_sec;

  std::filesystem::path sidecar = ids_path;
  sidecar += ".json";
  std::ofstream out = open_output(sidecar);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("failed writing " + sidecar.string());
}

std::vector<std::string> load_subset_ids(const std::filesystem::path& path) {
  std::vector<std::string> ids;
  for (const std::string& line : read_lines(path)) {
    if (is_comment_line(line) || line.empty()) continue;
    ids.push_back(line);
  }
  return ids;
}

}  // namespace subsel
