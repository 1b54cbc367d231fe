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

#include "qaug/delex.hpp"
#include "qaug/pipeline.hpp"
#include "qaug/text_io.hpp"
#include "qaug/textgen.hpp"
#include "test_util.hpp"

using namespace qaug;
using namespace qaug::delex;

namespace {

FrameLexicon frames_of(std::initializer_list<std::pair<const char*, const char*>> rows) {
  FrameLexicon lex("test");
  for (const auto& [l, f] : rows) lex.add(l, f);
  return lex;
}

morph::MorphToken tok(const std::string& surface, const std::string& lemma) {
  return {surface, lemma, "NOUN", {}};
}

const char* kWorkedExample =
    "qanyanwata riqira juliacachu achka wambrakunata kaywata pitasi riqiragchu kay sullanachu";

pipeline::Resources bundled() {
  pipeline::PipelineConfig cfg;
  const auto d = testutil::data_dir();
  cfg.suffix_rules = d / "suffix_rules.tsv";
  cfg.suffix_inventory = d / "suffix_inventory.tsv";
  cfg.lemma_lexicon = d / "lemma_lexicon.tsv";
  cfg.frame_lexicon = d / "frame_lexicon.tsv";
  cfg.bilingual_map = d / "bilingual_map.tsv";
  cfg.pivot_lexicon = d / "pivot_lexicon.tsv";
  cfg.role_lexicon = d / "role_lexicon.tsv";
  cfg.g2p_table = d / "g2p.tsv";
  return pipeline::Resources::load(cfg);
}

}  // namespace

TEST_CASE("lookup_frame follows primary, then bridge to pivot") {
  auto primary = frames_of({{"juliaca", "city_name"}});
  LemmaMap bridge("b");
  bridge.add("kaywata", "may");
  bridge.add("ghost", "nowhere");
  auto pivot = frames_of({{"may", "month_name"}});
  CHECK(lookup_frame("juliaca", primary, bridge, pivot) == "city_name");
  CHECK(lookup_frame("JULIACA", primary, bridge, pivot) == "city_name");
  CHECK(lookup_frame("kaywata", primary, bridge, pivot) == "month_name");
  CHECK_FALSE(lookup_frame("ghost", primary, bridge, pivot));
  CHECK_FALSE(lookup_frame("wasi", primary, bridge, pivot));
  CHECK_FALSE(lookup_frame("kaywata", primary, {}, {}));
}

TEST_CASE("select_frames") {
  auto corpus_of = [](std::map<std::string, int> freq) {
    std::vector<TaggedSentence> c(1);
    for (const auto& [f, n] : freq)
      for (int i = 0; i < n; ++i) c[0].push_back(f);
    c[0].push_back(std::nullopt);
    return c;
  };
  CHECK(select_frames(corpus_of({{"month_name", 10}, {"city_name", 7}, {"time_name", 5}, {"animal", 1}}), 3) ==
        std::vector<std::string>{"month_name", "city_name", "time_name"});
  CHECK(select_frames(corpus_of({{"only", 2}}), 1) == std::vector<std::string>{"only"});
  CHECK(select_frames(corpus_of({{"b", 3}, {"a", 3}}), 1) == std::vector<std::string>{"a"});
  CHECK(select_frames(corpus_of({{"b", 3}, {"a", 3}}), 5).size() == 2);
}

TEST_CASE("delexicalize with a role map") {
  std::vector<morph::MorphToken> toks{tok("juliacachu", "juliaca"), tok("achka", "achka")};
  std::vector<std::optional<std::string>> fr{"city_name", std::nullopt};
  SUBCASE("selected frame becomes a slot") {
    auto r = delexicalize(toks, fr, {"city_name"}, {{"city_name", "B-fromloc"}}, "u1");
    REQUIRE(r.sentence.items.size() == 2);
    CHECK(std::get<SlotLabel>(r.sentence.items[0]) == SlotLabel{"B-fromloc", "city_name"});
    CHECK(std::get<Literal>(r.sentence.items[1]).token == "achka");
    CHECK(r.harvest.at("city_name") == std::vector<std::string>{"juliacachu"});
    CHECK(r.sentence.render() == "<B-fromloc city_name> achka");
  }
  SUBCASE("nothing selected leaves all literals") {
    auto r = delexicalize(toks, fr, {}, {{"city_name", "B-fromloc"}});
    CHECK(r.sentence.slot_count() == 0);
    CHECK(r.harvest.empty());
  }
  SUBCASE("single in-frame token") {
    std::vector<morph::MorphToken> one{tok("lima", "lima")};
    std::vector<std::optional<std::string>> f1{"city_name"};
    auto r = delexicalize(one, f1, {"city_name"}, {{"city_name", "B-toloc"}});
    CHECK(r.sentence.slot_count() == 1);
    CHECK(r.harvest.at("city_name").size() == 1);
  }
  SUBCASE("missing role") {
    CHECK_THROWS_AS(delexicalize(toks, fr, {"city_name"}, std::map<std::string, std::string>{}), MissingRole);
  }
}

TEST_CASE("roles default to B- plus the frame") {
  LemmaMap roles("r");
  roles.add("juliaca", "B-fromloc");
  RoleAssigner ra(roles);
  CHECK(ra.role("juliaca", "city_name") == "B-fromloc");
  CHECK(ra.role("lima", "city_name") == "B-city_name");
}

TEST_CASE("worked-example sentence slots land at the expected positions") {
  auto res = bundled();
  auto texts = std::vector<std::pair<std::string, std::string>>{{"example", kWorkedExample}};
  for (const auto& l : read_lines(testutil::data_dir() / "mini" / "sentences.txt"))
    if (!trim(l).empty()) texts.emplace_back("x" + std::to_string(texts.size()), l);
  auto dc = pipeline::delexicalize_corpus(texts, res, 3);
  CHECK(dc.results[0].sentence.render() ==
        "<B-date month_name> riqira <B-fromloc city_name> achka wambrakunata <B-date month_name> pitasi "
        "riqiragchu kay <B-toloc city_name>");
}

TEST_CASE("bilingual fallback tags a lemma missing from the primary lexicon") {
  auto res = bundled();
  auto toks = res.analyzer.analyze("Pawqarwaraypi Ariqipaman ripuni");
  CHECK(res.frame_of(toks[1]) == "city_name");
  CHECK_FALSE(res.frames.find("ariqipa"));
}

TEST_CASE("round trip over the mini-corpus reproduces every sentence") {
  auto res = bundled();
  std::vector<std::pair<std::string, std::string>> texts;
  for (const auto& l : read_lines(testutil::data_dir() / "mini" / "sentences.txt"))
    if (!trim(l).empty()) texts.emplace_back("s" + std::to_string(texts.size()), l);
  auto dc = pipeline::delexicalize_corpus(texts, res, 3);
  REQUIRE(dc.results.size() == 20);
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const auto& s = dc.results[i].sentence;
    CHECK(s.items.size() == dc.analyzed[i].size());
    CHECK(realize_with_fills(s) == morph::tokenize(texts[i].second));
    CHECK(realize_with_fills(s) == res.analyzer.normalize(texts[i].second));
  }
  // Every harvested word looks up to the frame that houses it.
  for (const auto& frame : dc.vocab.frames())
    for (const auto& w : dc.vocab.words(frame)) {
      auto t = res.analyzer.analyze_token(w);
      CHECK(res.frame_of(t) == frame);
    }
}

TEST_CASE("build_slot_vocab keeps first-seen order without duplicates") {
  CHECK(build_slot_vocab({}).empty());
  DelexResult a, b, c;
  a.harvest["city_name"] = {"juliacachu"};
  b.harvest["city_name"] = {"sullanachu"};
  c.harvest["city_name"] = {"juliacachu"};
  std::vector<DelexResult> all{a, b, c};
  auto v = build_slot_vocab(all);
  CHECK(v.words("city_name") == std::vector<std::string>{"juliacachu", "sullanachu"});
  auto dir = testutil::scratch("delex");
  write_file(dir / "v.tsv", v.to_tsv());
  CHECK(SlotVocabulary::from_tsv(dir / "v.tsv").words("city_name") == v.words("city_name"));
}

TEST_CASE("parse_template round trips rendered templates") {
  const std::string t = "<B-date month_name> riqira <B-fromloc city_name> achka";
  CHECK(parse_template(t).render() == t);
  CHECK(parse_template(t).slot_count() == 2);
  CHECK_THROWS_AS(parse_template("<B-date month_name riqira"), ParseError);
  CHECK_THROWS_AS(parse_template("<date month_name> x"), ParseError);
}
