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
// Drives the installed `subsel` binary end to end through std::system.
// SUBSEL_CLI_PATH is injected by the build.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "subsel/rng.hpp"
#include "subsel/textio.hpp"

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("subsel_cli_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Runs the CLI, returns its exit code; stdout lands in `out` when given.
int run_cli(const std::string& args, const fs::path* out = nullptr) {
  std::string cmd = std::string(SUBSEL_CLI_PATH) + " " + args;
  cmd += out != nullptr ? " > " + q(*out) : std::string(" > /dev/null");
  cmd += " 2> /dev/null";
  const int rc = std::system(cmd.c_str());
  REQUIRE(rc != -1);
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

std::vector<std::string> data_lines(const fs::path& p) {
  std::vector<std::string> out;
  for (const std::string& line : subsel::read_lines(p))
    if (!subsel::is_comment_line(line)) out.push_back(line);
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// A small deterministic pool shared by the pipeline tests.
struct SynthPool {
  TempDir dir;
  fs::path manifest;
  fs::path units;
  SynthPool() {
    manifest = dir.path / "pool.tsv";
    units = dir.path / "pool.units";
    const int code =
        run_cli("synth --seed 5 --n-utts 240 --out-manifest " + q(manifest) +
                " --out-units " + q(units));
    REQUIRE(code == 0);
  }
};

// Budget stays clear of the score-tail eligible mass (~171 s on this pool).
const std::string kPipelineKnobs =
    " --cluster-count 64 --vocab-size 300 --criterion score_tail"
    " --budget-hours 0.04 --replicates 3 --seed 11";

}  // namespace

TEST_CASE("cli: pipeline output matches the stages run one at a time") {
  SynthPool pool;
  const fs::path wd1 = pool.dir.path / "piped";
  const fs::path wd2 = pool.dir.path / "staged";
  fs::create_directories(wd2);

  REQUIRE(run_cli("pipeline --manifest " + q(pool.manifest) + " --units " +
                  q(pool.units) + " --workdir " + q(wd1) + kPipelineKnobs) == 0);

  REQUIRE(run_cli("rle --units " + q(pool.units) + " --out " +
                  q(wd2 / "rle.units")) == 0);
  REQUIRE(run_cli("bpe-train --units " + q(wd2 / "rle.units") +
                  " --out-model " + q(wd2 / "bpe.model") +
                  " --vocab-size 300 --cluster-count 64") == 0);
  REQUIRE(run_cli("bpe-apply --model " + q(wd2 / "bpe.model") + " --units " +
                  q(wd2 / "rle.units") + " --out " + q(wd2 / "tokens.units")) ==
          0);
  REQUIRE(run_cli("lm-train --tokens " + q(wd2 / "tokens.units") +
                  " --out-model " + q(wd2 / "lm.model") + " --order 3") == 0);
  REQUIRE(run_cli("score --kind ppl --manifest " + q(pool.manifest) +
                  " --units " + q(pool.units) +
                  " --cluster-count 64 --bpe-model " + q(wd2 / "bpe.model") +
                  " --lm-model " + q(wd2 / "lm.model") + " --out " +
                  q(wd2 / "scores_ppl.tsv")) == 0);
  REQUIRE(run_cli("select --manifest " + q(pool.manifest) + " --scores " +
                  q(wd2 / "scores_ppl.tsv") + " --out-prefix " +
                  q(wd2 / "subset") +
                  " --criterion score_tail --budget-hours 0.04"
                  " --replicates 3 --seed 11") == 0);

  for (const char* name : {"rle.units", "bpe.model", "tokens.units", "lm.model",
                           "scores_ppl.tsv", "subset_r0.ids", "subset_r1.ids",
                           "subset_r2.ids", "subset_summary.tsv"}) {
    CAPTURE(name);
    CHECK(data_lines(wd1 / name) == data_lines(wd2 / name));
  }

  // The pipeline's stats table keys rows by subset path, so rebuild it with
  // the stats subcommand pointed at the pipeline's own subset files.
  const fs::path restats = wd2 / "restats.tsv";
  REQUIRE(run_cli("stats --manifest " + q(pool.manifest) + " --scores " +
                  q(wd1 / "scores_ppl.tsv") + " --subset " +
                  q(wd1 / "subset_r0.ids") + " --subset " +
                  q(wd1 / "subset_r1.ids") + " --subset " +
                  q(wd1 / "subset_r2.ids") + " --out " + q(restats)) == 0);
  CHECK(data_lines(wd1 / "stats.tsv") == data_lines(restats));
}

TEST_CASE("cli: identical runs produce identical artifacts") {
  SynthPool pool;
  const fs::path wd1 = pool.dir.path / "run1";
  const fs::path wd2 = pool.dir.path / "run2";
  const std::string common = "pipeline --manifest " + q(pool.manifest) +
                             " --units " + q(pool.units) + kPipelineKnobs;
  REQUIRE(run_cli(common + " --workdir " + q(wd1)) == 0);
  REQUIRE(run_cli(common + " --workdir " + q(wd2)) == 0);
  // The workdir path shows up in provenance (sidecar args echo) and in the
  // stats row keys, so compare with it masked out; everything else must match.
  const auto normalized = [](const fs::path& file, const fs::path& wd) {
    std::vector<std::string> lines = data_lines(file);
    const std::string needle = wd.string();
    for (std::string& line : lines) {
      size_t at = 0;
      while ((at = line.find(needle, at)) != std::string::npos)
        line.replace(at, needle.size(), "<WD>");
    }
    return lines;
  };
  for (const auto& entry : fs::directory_iterator(wd1)) {
    const fs::path name = entry.path().filename();
    CAPTURE(name.string());
    CHECK(normalized(entry.path(), wd1) == normalized(wd2 / name, wd2));
  }
  // Same workdir, same bytes: headers included.
  const std::string before = slurp(wd1 / "scores_ppl.tsv");
  REQUIRE(run_cli(common + " --workdir " + q(wd1)) == 0);
  CHECK(slurp(wd1 / "scores_ppl.tsv") == before);
}

TEST_CASE("cli: subset sidecars record the derived replicate seed") {
  SynthPool pool;
  const fs::path wd = pool.dir.path / "sel";
  fs::create_directories(wd);
  REQUIRE(run_cli("select --manifest " + q(pool.manifest) + " --out-prefix " +
                  q(wd / "subset") +
                  " --criterion pure_random --budget-hours 0.05"
                  " --replicates 2 --seed 11") == 0);
  for (int i = 0; i < 2; ++i) {
    const auto sidecar = nlohmann::json::parse(
        slurp(wd / ("subset_r" + std::to_string(i) + ".ids.json")));
    CHECK(sidecar.at("replicate_index") == i);
    CHECK(sidecar.at("seed") ==
          subsel::derive_seed(11, static_cast<uint64_t>(i)));
    CHECK(sidecar.at("criterion") == "pure_random");
  }
}

TEST_CASE("cli: worker count does not change scores") {
  SynthPool pool;
  const fs::path wd = pool.dir.path / "workers";
  fs::create_directories(wd);
  const std::string prep =
      "rle --units " + q(pool.units) + " --out " + q(wd / "rle.units");
  REQUIRE(run_cli(prep) == 0);
  REQUIRE(run_cli("bpe-train --units " + q(wd / "rle.units") + " --out-model " +
                  q(wd / "bpe.model") +
                  " --vocab-size 300 --cluster-count 64") == 0);
  REQUIRE(run_cli("bpe-apply --model " + q(wd / "bpe.model") + " --units " +
                  q(wd / "rle.units") + " --out " + q(wd / "tokens.units")) ==
          0);
  REQUIRE(run_cli("lm-train --tokens " + q(wd / "tokens.units") +
                  " --out-model " + q(wd / "lm.model")) == 0);
  const std::string score_common =
      "score --kind ppl --manifest " + q(pool.manifest) + " --units " +
      q(pool.units) + " --cluster-count 64 --bpe-model " + q(wd / "bpe.model") +
      " --lm-model " + q(wd / "lm.model");
  REQUIRE(run_cli(score_common + " --workers 1 --out " + q(wd / "s1.tsv")) ==
          0);
  REQUIRE(run_cli(score_common + " --workers 4 --out " + q(wd / "s4.tsv")) ==
          0);
  CHECK(data_lines(wd / "s1.tsv") == data_lines(wd / "s4.tsv"));
}

TEST_CASE("cli: werr pair, file and check modes") {
  TempDir tmp;
  const fs::path out = tmp.path / "out.txt";

  REQUIRE(run_cli("werr --baseline 9.61 --wer 8.93", &out) == 0);
  auto lines = data_lines(out);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0] == "werr_percent\t7.07596253902185");

  const fs::path wer_file = tmp.path / "wers.tsv";
  std::ofstream(wer_file) << "label\twer\nA\t8.93\nB\t8.8\n";
  const fs::path box = tmp.path / "box.tsv";
  REQUIRE(run_cli("werr --baseline 9.61 --wer-file " + q(wer_file) +
                      " --box-out " + q(box),
                  &out) == 0);
  lines = data_lines(out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "label\twer\twerr_percent");
  CHECK(lines[1].substr(0, 2) == "A\t");
  const auto box_lines = data_lines(box);
  REQUIRE(box_lines.size() == 7);
  CHECK(box_lines[0] == "stat\tvalue");
  bool saw_max = false;
  for (const auto& line : box_lines)
    if (line == "max\t8.428720083246604") saw_max = true;
  CHECK(saw_max);

  // One consistent row, one that only reproduces to 0.08 pp.
  const fs::path check_file = tmp.path / "check.tsv";
  std::ofstream(check_file)
      << "label\tbaseline_wer\tstated_wer\tstated_werr\n"
      << "OTHER_OK\t9.61\t8.93\t7.08\n"
      << "CLEAN_OFF\t4.48\t4.25\t5.05\n";
  REQUIRE(run_cli("werr --check " + q(check_file), &out) == 0);
  lines = data_lines(out);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] ==
        "label\tbaseline_wer\tstated_wer\tstated_werr\trecomputed_werr"
        "\tdiscrepancy_pp\tflagged");
  CHECK(lines[1].substr(0, 9) == "OTHER_OK\t");
  CHECK(lines[1].back() == '0');
  CHECK(lines[2].substr(0, 10) == "CLEAN_OFF\t");
  CHECK(lines[2].back() == '1');

  // Exactly one input mode at a time.
  CHECK(run_cli("werr --baseline 9.61 --wer 8.93 --check " + q(check_file)) ==
        1);
  CHECK(run_cli("werr --baseline 9.61") == 1);
  CHECK(run_cli("werr --wer 8.93") == 1);
}

TEST_CASE("cli: correlate computes a matrix over numeric columns") {
  TempDir tmp;
  const fs::path table = tmp.path / "t.tsv";
  std::ofstream(table) << "key\ta\tb\tnote\tconst\n"
                       << "r1\t1\t1\tx\t5\n"
                       << "r2\t2\t3\tx\t5\n"
                       << "r3\t3\t2\tx\t5\n"
                       << "r4\t4\t4\tx\t5\n";
  const fs::path out = tmp.path / "m.tsv";
  REQUIRE(run_cli("correlate --table " + q(table) + " --out " + q(out)) == 0);
  const auto lines = data_lines(out);
  REQUIRE(lines.size() == 4);  // header + a, b, const ("note" is not numeric)
  CHECK(lines[0] == "column\ta\tb\tconst");
  CHECK(lines[1].rfind("a\t1\t0.8\t", 0) == 0);
  CHECK(lines[1].find("nan") != std::string::npos);

  REQUIRE(run_cli("correlate --table " + q(table) + " --columns a,b --out " +
                  q(out)) == 0);
  CHECK(data_lines(out)[0] == "column\ta\tb");
  CHECK(run_cli("correlate --table " + q(table) + " --columns a,zz") == 1);
}

TEST_CASE("cli: exit codes distinguish usage, data and success") {
  SynthPool pool;
  TempDir tmp;
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("--version") == 0);
  CHECK(run_cli("definitely-not-a-subcommand") == 1);
  CHECK(run_cli("select --manifest " + q(pool.manifest) +
                " --out-prefix " + q(tmp.path / "s") +
                " --criterion no_such_criterion") == 1);
  // Score criterion without any score table attached.
  CHECK(run_cli("select --manifest " + q(pool.manifest) + " --out-prefix " +
                q(tmp.path / "s") +
                " --criterion score_tail --budget-hours 0.05") == 2);
  // Missing input file.
  CHECK(run_cli("rle --units " + q(tmp.path / "absent.units") + " --out " +
                q(tmp.path / "out.units")) == 2);
  // Budget beyond the pool.
  CHECK(run_cli("select --manifest " + q(pool.manifest) + " --out-prefix " +
                q(tmp.path / "s") +
                " --criterion pure_random --budget-hours 10000") == 2);
}

TEST_CASE("cli: stats reports the pool row by default") {
  SynthPool pool;
  TempDir tmp;
  const fs::path out = tmp.path / "stats.tsv";
  REQUIRE(run_cli("stats --manifest " + q(pool.manifest) + " --out " + q(out)) ==
          0);
  const auto lines = data_lines(out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].rfind("key\tn_utts\t", 0) == 0);
  CHECK(lines[1].rfind("pool\t240\t", 0) == 0);
}
