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

#ifndef QAUG_DELEX_HPP_
#define QAUG_DELEX_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qaug/error.hpp"
#include "qaug/morph.hpp"

namespace qaug::delex {

// lemma -> label map with case-insensitive keys. Used for frame lexicons,
// the bilingual bridge (lemma -> pivot word) and the role lexicon.
class LemmaMap {
 public:
  LemmaMap() = default;
  explicit LemmaMap(std::string source) : source_(std::move(source)) {}

  void add(std::string_view lemma, std::string value);
  std::optional<std::string> find(std::string_view lemma) const;
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::string& source() const { return source_; }

 private:
  std::unordered_map<std::string, std::string> entries_;
  std::string source_;
};

using FrameLexicon = LemmaMap;
using BilingualMap = LemmaMap;
using RoleLexicon = LemmaMap;

// Two-column TSV (key, value); header row starting with header_key skipped.
LemmaMap load_lemma_map(const std::filesystem::path& path, std::string_view header_key = "lemma");

struct SlotLabel {
  std::string role;   // "B-fromloc"
  std::string frame;  // "city_name"

  std::string render() const { return "<" + role + " " + frame + ">"; }
  bool operator==(const SlotLabel&) const = default;
  auto operator<=>(const SlotLabel&) const = default;
};

struct Literal {
  std::string token;
  bool operator==(const Literal&) const = default;
};

using Item = std::variant<Literal, SlotLabel>;

std::string render(const Item& item);

struct DelexSentence {
  std::vector<Item> items;
  std::string origin_id = "generated";
  std::map<std::size_t, std::string> fills;  // slot position -> surface word

  std::string render() const;
  std::vector<std::string> rendered_items() const;
  std::size_t slot_count() const;
};

// Parses the "<ROLE FRAME> literal ..." form. Throws ParseError on an
// unterminated or malformed slot.
DelexSentence parse_template(std::string_view rendered);

// Surface sentence from the template's own fills. Throws InvalidArgument when
// a slot has no fill.
std::vector<std::string> realize_with_fills(const DelexSentence& s);

class MissingRole : public Error {
 public:
  explicit MissingRole(std::string frame)
      : Error("no role for frame '" + frame + "'"), frame_(std::move(frame)) {}
  const std::string& frame() const { return frame_; }

 private:
  std::string frame_;
};

// Frame of a lemma: the primary lexicon first, then the bridge into the
// pivot-language lexicon. First hit wins.
std::optional<std::string> lookup_frame(std::string_view lemma, const FrameLexicon& primary,
                                        const BilingualMap& bridge = {},
                                        const FrameLexicon& pivot = {});

// Per-token frame labels of one sentence; nullopt marks an untagged token.
using TaggedSentence = std::vector<std::optional<std::string>>;

// The k most frequent frames, ties alphabetical.
std::vector<std::string> select_frames(std::span<const TaggedSentence> corpus, std::size_t k);

// Harvest of one sentence, frame -> surface words in sentence order.
using Harvest = std::map<std::string, std::vector<std::string>>;

struct DelexResult {
  DelexSentence sentence;
  Harvest harvest;
};

// Role lookup: role lexicon entry for the lemma if any, else "B-" + frame.
class RoleAssigner {
 public:
  RoleAssigner() = default;
  explicit RoleAssigner(RoleLexicon lexicon) : lexicon_(std::move(lexicon)) {}
  std::string role(std::string_view lemma, std::string_view frame) const;

 private:
  RoleLexicon lexicon_;
};

// Replaces tokens whose frame is selected by slots. frames[i] is the frame of
// tokens[i] (from lookup_frame), role_map gives each selected frame's role.
DelexResult delexicalize(std::span<const morph::MorphToken> tokens,
                         std::span<const std::optional<std::string>> frames,
                         const std::set<std::string>& selected,
                         const std::map<std::string, std::string>& role_map,
                         std::string origin_id = "generated");

// Same, with roles resolved per lemma by a RoleAssigner (never MissingRole).
DelexResult delexicalize(std::span<const morph::MorphToken> tokens,
                         std::span<const std::optional<std::string>> frames,
                         const std::set<std::string>& selected, const RoleAssigner& roles,
                         std::string origin_id = "generated");

// frame -> de-duplicated surface words, first-seen order.
class SlotVocabulary {
 public:
  void add(const std::string& frame, const std::string& word);
  void merge(const Harvest& h);
  const std::vector<std::string>& words(const std::string& frame) const;
  bool has(const std::string& frame) const;
  std::vector<std::string> frames() const;
  bool empty() const { return by_frame_.empty(); }

  // TSV: frame <tab> word, one pair per line, in insertion order per frame.
  std::string to_tsv() const;
  static SlotVocabulary from_tsv(const std::filesystem::path& path);

 private:
  std::map<std::string, std::vector<std::string>> by_frame_;
  std::map<std::string, std::set<std::string>> seen_;
};

SlotVocabulary build_slot_vocab(std::span<const DelexResult> results);

}  // namespace qaug::delex

#endif  // QAUG_DELEX_HPP_
