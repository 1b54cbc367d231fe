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

#ifndef QAUG_MORPH_HPP_
#define QAUG_MORPH_HPP_

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qaug::morph {

// One row of the orthographic normalization table: dialectal variants of a
// suffix and the standard spelling they are rewritten to.
struct SuffixRule {
  std::string function;
  std::vector<std::string> variants;
  std::string standard;
  bool after_vowel = false;  // only applies when the suffix follows a vowel
};

enum class SuffixClass { kNominalizing, kVerbalizing, kNominal, kVerbal, kIndependent };

std::string_view to_string(SuffixClass c);
SuffixClass parse_suffix_class(std::string_view s);

struct SuffixEntry {
  std::string form;
  std::string tag;
  SuffixClass cls = SuffixClass::kNominal;

  bool operator==(const SuffixEntry&) const = default;
};

struct MorphToken {
  std::string surface;
  std::string lemma;
  std::string pos;
  std::vector<SuffixEntry> suffixes;  // surface order, left to right

  // lemma followed by each suffix form.
  std::vector<std::string> morphemes() const;
};

inline constexpr std::string_view kDefaultPos = "NOUN";

// lemma -> POS, keyed case-insensitively.
class LemmaLexicon {
 public:
  void add(std::string_view lemma, std::string pos);
  bool contains(std::string_view lemma) const;
  // Empty when absent.
  std::string pos(std::string_view lemma) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, std::string> entries_;
};

// Table files (tab separated, '#' comments):
//   rules:     function, variants (comma separated), standard [, context]
//              context is "any" (default) or "after_vowel"
//   inventory: form, tag, class
//   lexicon:   lemma, pos
std::vector<SuffixRule> load_suffix_rules(const std::filesystem::path& path);
std::vector<SuffixEntry> load_suffix_inventory(const std::filesystem::path& path);
LemmaLexicon load_lemma_lexicon(const std::filesystem::path& path);

// Lowercases, splits on whitespace and strips punctuation from token edges.
// Apostrophes inside a token are kept (typographic ones become ASCII).
std::vector<std::string> tokenize(std::string_view text);

// Rewrites dialectal suffix variants to their standard spelling. Suffixes are
// peeled from the right, longest form first; any rule variant or standard, and
// any inventory form, counts as a boundary to continue peeling past. Peeling
// stops when nothing matches, the remaining stem would drop below two
// characters, or the stem is a known lemma.
std::string standardize_suffixes(std::string_view token, std::span<const SuffixRule> rules,
                                 std::span<const SuffixEntry> inventory = {},
                                 const LemmaLexicon* lexicon = nullptr);

// Greedy right-to-left longest-suffix stripping that stops as soon as the
// remainder is a known lemma. Equal-length matches go to the entry listed
// first in the inventory.
MorphToken segment(std::string_view token, std::span<const SuffixEntry> inventory,
                   const LemmaLexicon& lexicon);

// Bundles the three tables for the normalize-then-segment step.
class Analyzer {
 public:
  Analyzer() = default;
  Analyzer(std::vector<SuffixRule> rules, std::vector<SuffixEntry> inventory,
           LemmaLexicon lexicon);

  static Analyzer load(const std::filesystem::path& rules, const std::filesystem::path& inventory,
                       const std::filesystem::path& lexicon);

  // tokenize + standardize_suffixes.
  std::vector<std::string> normalize(std::string_view text) const;
  std::string normalize_token(std::string_view token) const;
  MorphToken analyze_token(std::string_view token) const;
  std::vector<MorphToken> analyze(std::string_view text) const;
  // Morpheme tokens of a whole text, used for token error rate.
  std::vector<std::string> morphemes(std::string_view text) const;

  const std::vector<SuffixRule>& rules() const { return rules_; }
  const std::vector<SuffixEntry>& inventory() const { return inventory_; }
  const LemmaLexicon& lexicon() const { return lexicon_; }

 private:
  std::vector<SuffixRule> rules_;
  std::vector<SuffixEntry> inventory_;
  LemmaLexicon lexicon_;
};

}  // namespace qaug::morph

#endif  // QAUG_MORPH_HPP_
