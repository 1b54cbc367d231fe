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

#include "qaug/error.hpp"
#include "qaug/morph.hpp"
#include "qaug/text_io.hpp"
#include "test_util.hpp"

using namespace qaug;
using namespace qaug::morph;

namespace {

const Analyzer& analyzer() {
  static const Analyzer a = testutil::bundled_analyzer();
  return a;
}

}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("").empty());
  CHECK(tokenize("Kaywata pitasi.") == std::vector<std::string>{"kaywata", "pitasi"});
  CHECK(tokenize("t'anta") == std::vector<std::string>{"t'anta"});
  CHECK(tokenize("¿Imataq kay?  «Ñawi»") == std::vector<std::string>{"imataq", "kay", "ñawi"});
  CHECK(tokenize("t’anta") == std::vector<std::string>{"t'anta"});
  CHECK(tokenize("...  ,") .empty());
}

TEST_CASE("every rule variant rewrites to its standard") {
  const auto& rules = analyzer().rules();
  REQUIRE(rules.size() == 8);
  for (const auto& rule : rules) {
    for (const auto& v : rule.variants) {
      const std::string stem = "miku";  // ends in a vowel, so after_vowel rules apply
      CAPTURE(rule.function);
      CAPTURE(v);
      CHECK(standardize_suffixes(stem + v, rules) == stem + rule.standard);
    }
  }
  CHECK(standardize_suffixes("mikusha", rules) == "mikuchka");
  CHECK(standardize_suffixes("ripas", rules) == "ripas");
  CHECK(standardize_suffixes("wasiq", rules) == "wasip");
}

TEST_CASE("after-vowel rules need a vowel before the suffix") {
  const auto& rules = analyzer().rules();
  CHECK(standardize_suffixes("atuqn", rules) == "atuqn");
  CHECK(standardize_suffixes("kaypan", rules) == "kaypam");
}

TEST_CASE("variants are rewritten behind other suffixes") {
  const auto& a = analyzer();
  CHECK(standardize_suffixes("mikushachu", a.rules(), a.inventory()) == "mikuchkachu");
  CHECK(a.normalize_token("mikusharqani") == "mikuchkarqani");
}

TEST_CASE("stems stay at least two characters and known lemmas are kept") {
  const auto& a = analyzer();
  CHECK(standardize_suffixes("sa", a.rules()) == "sa");
  CHECK(standardize_suffixes("asa", a.rules()) == "asa");
  CHECK(a.normalize_token("kunan") == "kunan");
  CHECK(a.normalize_token("wasi") == "wasi");
  CHECK(a.normalize_token("riqiraqchu") == "riqirapchu");
}

TEST_CASE("standardization is idempotent on the fixture corpus") {
  const auto& a = analyzer();
  auto lines = read_lines(testutil::data_dir() / "mini" / "sentences.txt");
  lines.push_back("mikusha wasiq ripis mikuñi mikuchis mikuschi mikuswan mikun");
  for (const auto& l : lines)
    for (const auto& t : tokenize(l)) {
      const auto once = a.normalize_token(t);
      CHECK(a.normalize_token(once) == once);
      CHECK(standardize_suffixes(standardize_suffixes(t, a.rules()), a.rules()) == standardize_suffixes(t, a.rules()));
    }
}

TEST_CASE("segment") {
  const auto& a = analyzer();
  SUBCASE("wasichapi") {
    auto t = a.analyze_token("wasichapi");
    CHECK(t.lemma == "wasi");
    CHECK(t.pos == "NOUN");
    REQUIRE(t.suffixes.size() == 2);
    CHECK(t.suffixes[0].form == "cha");
    CHECK(t.suffixes[0].tag == "SUF-DI");
    CHECK(t.suffixes[1].form == "pi");
    CHECK(t.suffixes[1].tag == "SUF-LO");
    CHECK(t.morphemes() == std::vector<std::string>{"wasi", "cha", "pi"});
  }
  SUBCASE("bare stem") {
    auto t = a.analyze_token("wasi");
    CHECK(t.lemma == "wasi");
    CHECK(t.suffixes.empty());
  }
  SUBCASE("no match and unknown is the identity") {
    auto t = a.analyze_token("xyzzo");
    CHECK(t.lemma == "xyzzo");
    CHECK(t.suffixes.empty());
    CHECK(t.pos == "NOUN");
  }
  SUBCASE("pos comes from the lexicon") {
    CHECK(a.analyze_token("juliacachu").pos == "PROPN");
    CHECK(a.analyze_token("juliacachu").lemma == "juliaca");
  }
}

TEST_CASE("equal-length ties go to the earlier inventory row") {
  std::vector<SuffixEntry> inv{{"ta", "FIRST", SuffixClass::kNominal}, {"ta", "SECOND", SuffixClass::kNominal}};
  LemmaLexicon lex;
  lex.add("wasi", "NOUN");
  auto t = segment("wasita", inv, lex);
  REQUIRE(t.suffixes.size() == 1);
  CHECK(t.suffixes[0].tag == "FIRST");
}

TEST_CASE("segmentation reconstructs the token and only uses inventory suffixes") {
  const auto& a = analyzer();
  for (const auto& l : read_lines(testutil::data_dir() / "mini" / "sentences.txt"))
    for (const auto& t : a.analyze(l)) {
      std::string rebuilt = t.lemma;
      for (const auto& s : t.suffixes) {
        rebuilt += s.form;
        CHECK(std::find(a.inventory().begin(), a.inventory().end(), s) != a.inventory().end());
      }
      CHECK(rebuilt == t.surface);
    }
}

TEST_CASE("table loaders reject malformed rows") {
  auto dir = testutil::scratch("morph");
  write_file(dir / "rules.tsv", "function\tvariants\tstandard\nprogressive\t\t-chka\n");
  CHECK_THROWS_AS(load_suffix_rules(dir / "rules.tsv"), ParseError);
  write_file(dir / "rules2.tsv", "function\tvariants\tstandard\tcontext\nx\t-a\t-b\tsometimes\n");
  CHECK_THROWS_AS(load_suffix_rules(dir / "rules2.tsv"), ParseError);
  write_file(dir / "inv.tsv", "form\ttag\tclass\ncha\tSUF-DI\tadjectival\n");
  CHECK_THROWS_AS(load_suffix_inventory(dir / "inv.tsv"), ParseError);
}
