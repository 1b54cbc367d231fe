//
// Copyright 2026 The qaug Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include <doctest.h>

#include <array>
#include <cstdio>
#include <sys/wait.h>

#include "qaug/corpus.hpp"
#include "qaug/text_io.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using qaug::read_file;
using qaug::read_lines;
using qaug::write_file;

namespace {

struct Run {
  int status;
  std::string output;  // stdout and stderr
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(QAUG_CLI) + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  while (std::size_t n = std::fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  const int raw = pclose(p);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string config() { return (fs::path(QAUG_MINI_DIR) / "config.ini").string(); }
std::string sentences() { return (testutil::data_dir() / "mini" / "sentences.txt").string(); }
std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("help and usage errors") {
  auto h = cli("--help");
  CHECK(h.status == 0);
  for (const char* sub : {"prepare", "normalize", "delex", "gen-text", "realize", "train-lm", "perplexity", "synth",
                          "perturb", "features", "score", "pipeline", "experiment"})
    CHECK(h.output.find(sub) != std::string::npos);
  CHECK(cli("").status != 0);
  CHECK(cli("no-such-command").status != 0);
  CHECK(cli("gen-text").status != 0);
}

TEST_CASE("text stages chain through files") {
  auto dir = testutil::scratch("cli_text");
  auto n = cli("normalize --config " + config() + " --input " + sentences() + " --out " + q(dir / "norm"));
  REQUIRE(n.status == 0);
  CHECK(read_lines(dir / "norm" / "normalized.txt").size() == 20);
  CHECK(fs::exists(dir / "norm" / "normalize.run.json"));

  auto d = cli("delex --config " + config() + " --input " + sentences() + " --out " + q(dir / "delex"));
  REQUIRE(d.status == 0);
  CHECK(d.output.find("frames: ") != std::string::npos);
  const auto delex = read_lines(dir / "delex" / "delex.txt");
  CHECK(delex.size() == 20);
  CHECK(delex[0] ==
        "<B-date month_name> riqira <B-fromloc city_name> achka wambrakunata <B-date month_name> pitasi "
        "riqiragchu kay <B-toloc city_name>");

  auto g = cli("gen-text --seed 3 --delex " + q(dir / "delex" / "delex.txt") + " --count 10 --out " + q(dir / "gen"));
  REQUIRE(g.status == 0);
  const auto templates = read_file(dir / "gen" / "templates.txt");
  auto g2 = cli("gen-text --seed 3 --delex " + q(dir / "delex" / "delex.txt") + " --count 10 --out " + q(dir / "gen2"));
  CHECK(read_file(dir / "gen2" / "templates.txt") == templates);

  auto r = cli("realize --seed 3 --templates " + q(dir / "gen" / "templates.txt") + " --vocab " +
               q(dir / "delex" / "slot_vocab.tsv") + " --out " + q(dir / "real"));
  REQUIRE(r.status == 0);
  const auto synthetic = read_lines(dir / "real" / "synthetic_text.txt");
  CHECK(synthetic.size() == read_lines(dir / "gen" / "templates.txt").size());

  auto t = cli("train-lm --text " + sentences() + " --text " + q(dir / "real" / "synthetic_text.txt") +
               " --order 3 --out " + q(dir / "lm"));
  REQUIRE(t.status == 0);
  CHECK(read_file(dir / "lm" / "lm.arpa").find("\\3-grams:") != std::string::npos);
  auto p = cli("perplexity --lm " + q(dir / "lm" / "lm.arpa") + " --text " + sentences());
  REQUIRE(p.status == 0);
  CHECK(p.output.starts_with("perplexity "));
}

TEST_CASE("audio commands") {
  auto dir = testutil::scratch("cli_audio");
  write_file(dir / "two.txt", "wasi\nkaywata pitasi\n");
  auto s = cli("synth --config " + config() + " --text " + q(dir / "two.txt") + " --origin natural --id-prefix t- --out " +
               q(dir / "synth"));
  REQUIRE(s.status == 0);
  auto m = qaug::corpus::load_manifest(dir / "synth" / "manifest.jsonl");
  REQUIRE(m.records.size() == 2);
  CHECK(m.records[0].id == "t-000001");
  CHECK(m.records[0].duration_ms == 320);

  auto p = cli("perturb --config " + config() + " --manifest " + q(dir / "synth" / "manifest.jsonl") +
               " --factor 1.15 --out " + q(dir / "dist"));
  REQUIRE(p.status == 0);
  auto dm = qaug::corpus::load_manifest(dir / "dist" / "manifest.jsonl");
  REQUIRE(dm.records.size() == 2);
  CHECK(dm.records[0].id == "dist-t-000001");
  CHECK(dm.records[0].origin == qaug::corpus::Origin::kDistorted);

  auto f = cli("features --manifest " + q(dir / "synth" / "manifest.jsonl") + " --csv --out " + q(dir / "feat"));
  REQUIRE(f.status == 0);
  CHECK(fs::exists(dir / "feat" / "t-000001.feat"));
  CHECK(fs::exists(dir / "feat" / "t-000001.csv"));
  CHECK(read_lines(dir / "feat" / "features.jsonl").size() == 2);

  auto prep = cli("prepare --manifest " + q(dir / "synth" / "manifest.jsonl") + " --split-ratios 0.5,0.5,0 --seed 4 --out " +
                  q(dir / "prep"));
  REQUIRE(prep.status == 0);
  CHECK(prep.output.starts_with("prepared 2 records"));
}

TEST_CASE("score") {
  auto dir = testutil::scratch("cli_score");
  write_file(dir / "ref.txt", "a b c\nd e\n");
  write_file(dir / "hyp.txt", "a c\nd e\n");
  auto s = cli("score --ref " + q(dir / "ref.txt") + " --hyp " + q(dir / "hyp.txt"));
  REQUIRE(s.status == 0);
  CHECK(s.output.starts_with("WER 20.00 (S=0 D=1 I=0 N=5)"));
  auto same = cli("score --ref " + q(dir / "ref.txt") + " --hyp " + q(dir / "ref.txt"));
  CHECK(same.output.starts_with("WER 0.00"));
  write_file(dir / "short.txt", "a\n");
  CHECK(cli("score --ref " + q(dir / "ref.txt") + " --hyp " + q(dir / "short.txt")).status != 0);
}

TEST_CASE("pipeline command: determinism and parity") {
  auto dir = testutil::scratch("cli_pipeline");
  auto a = cli("pipeline --config " + config() + " --out " + q(dir / "a"));
  REQUIRE(a.status == 0);
  auto b = cli("pipeline --config " + config() + " --out " + q(dir / "b"));
  REQUIRE(b.status == 0);
  CHECK(read_file(dir / "a" / "synthetic_text.txt") == read_file(dir / "b" / "synthetic_text.txt"));
  CHECK(read_file(dir / "a" / "synth" / "syn-000001.wav") == read_file(dir / "b" / "synth" / "syn-000001.wav"));
  auto m = qaug::corpus::load_manifest(dir / "a" / "manifest.merged.jsonl");
  CHECK(m.records.size() == 40);
}

TEST_CASE("failures exit nonzero and name the stage") {
  auto dir = testutil::scratch("cli_fail");
  auto r = cli("pipeline --config " + config() + " --adapter " + q(testutil::adapter("malformed")) + " --out " +
               q(dir / "x"));
  CHECK(r.status != 0);
  CHECK(r.output.find("stage 'generate' failed") != std::string::npos);
  write_file(dir / "bad.ini", "[run]\nsede = 1\n");
  auto c = cli("pipeline --config " + q(dir / "bad.ini"));
  CHECK(c.status != 0);
  CHECK(c.output.find("sede") != std::string::npos);
}

TEST_CASE("experiment command writes both tables") {
  auto dir = testutil::scratch("cli_experiment");
  auto r = cli("experiment --config " + config() + " --out " + q(dir));
  REQUIRE(r.status == 0);
  const auto t4 = read_lines(dir / "experiment" / "table4.tsv");
  CHECK(t4.size() == 5);
  CHECK(t4[0] == "Experiment\tTraining data\tTraining hours\tWER (%)");
  const auto t5 = read_lines(dir / "experiment" / "table5.tsv");
  CHECK(t5.size() == 4);
  CHECK(t5[0].starts_with("Method\t"));
  for (const char* v : {"exp1_natural", "exp2_distorted", "exp3_synthetic", "exp4_doubled", "ablation_no_tts",
                        "ablation_no_seq2seq"})
    CHECK(fs::exists(dir / "experiment" / v / "manifest.jsonl"));
}
