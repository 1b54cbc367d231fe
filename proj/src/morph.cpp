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

#include "qaug/morph.hpp"

#include <algorithm>
#include <array>

#include "qaug/error.hpp"
#include "qaug/text_io.hpp"

namespace qaug::morph {

namespace {

constexpr std::size_t kMinStemChars = 2;

std::size_t char_count(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

bool ends_with_vowel(std::string_view s) {
  static constexpr std::array<std::string_view, 10> kVowels = {
      "a", "e", "i", "o", "u", "\xC3\xA1", "\xC3\xA9", "\xC3\xAD", "\xC3\xB3", "\xC3\xBA"};
  for (auto v : kVowels)
    if (s.ends_with(v)) return true;
  return false;
}

bool is_edge_punct(std::string_view ch) {
  if (ch.size() == 1) return std::ispunct(static_cast<unsigned char>(ch[0])) != 0;
  static constexpr std::array<std::string_view, 10> kUnicode = {
      "\xC2\xBF", "\xC2\xA1", "\xC2\xAB", "\xC2\xBB",          // ¿ ¡ « »
      "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98",          // “ ” ‘
      "\xE2\x80\x99", "\xE2\x80\xA6", "\xE2\x80\x94"};         // U+2019 U+2026 U+2014
  return std::find(kUnicode.begin(), kUnicode.end(), ch) != kUnicode.end();
}

std::string lower_key(std::string_view s) { return utf8_lower(trim(s)); }

}  // namespace

std::string_view to_string(SuffixClass c) {
  switch (c) {
    case SuffixClass::kNominalizing: return "nominalizing";
    case SuffixClass::kVerbalizing: return "verbalizing";
    case SuffixClass::kNominal: return "nominal";
    case SuffixClass::kVerbal: return "verbal";
    case SuffixClass::kIndependent: return "independent";
  }
  return "nominal";
}

SuffixClass parse_suffix_class(std::string_view s) {
  for (auto c : {SuffixClass::kNominalizing, SuffixClass::kVerbalizing, SuffixClass::kNominal,
                 SuffixClass::kVerbal, SuffixClass::kIndependent})
    if (to_string(c) == s) return c;
  throw InvalidArgument("unknown suffix class '" + std::string(s) + "'");
}

std::vector<std::string> MorphToken::morphemes() const {
  std::vector<std::string> out{lemma};
  for (const auto& s : suffixes) out.push_back(s.form);
  return out;
}

void LemmaLexicon::add(std::string_view lemma, std::string pos) {
  entries_.insert_or_assign(lower_key(lemma), std::move(pos));
}

bool LemmaLexicon::contains(std::string_view lemma) const {
  return entries_.contains(lower_key(lemma));
}

std::string LemmaLexicon::pos(std::string_view lemma) const {
  auto it = entries_.find(lower_key(lemma));
  return it == entries_.end() ? std::string() : it->second;
}

static std::string strip_dash(std::string_view s) {
  s = trim(s);
  if (s.starts_with('-')) s.remove_prefix(1);
  return utf8_lower(trim(s));
}

std::vector<SuffixRule> load_suffix_rules(const std::filesystem::path& path) {
  std::vector<SuffixRule> rules;
  for (const auto& row : read_tsv(path, "function")) {
    if (row.fields.size() < 3)
      throw ParseError(path.string(), row.line, "expected function, variants, standard");
    SuffixRule r;
    r.function = row.fields[0];
    for (const auto& v : split(row.fields[1], ',')) {
      auto form = strip_dash(v);
      if (!form.empty()) r.variants.push_back(form);
    }
    r.standard = strip_dash(row.fields[2]);
    if (r.variants.empty() || r.standard.empty())
      throw ParseError(path.string(), row.line, "rule needs at least one variant and a standard");
    if (row.fields.size() > 3 && !row.fields[3].empty()) {
      if (row.fields[3] == "after_vowel") {
        r.after_vowel = true;
      } else if (row.fields[3] != "any") {
        throw ParseError(path.string(), row.line, "unknown context '" + row.fields[3] + "'");
      }
    }
    rules.push_back(std::move(r));
  }
  return rules;
}

std::vector<SuffixEntry> load_suffix_inventory(const std::filesystem::path& path) {
  std::vector<SuffixEntry> inv;
  for (const auto& row : read_tsv(path, "form")) {
    if (row.fields.size() < 3) throw ParseError(path.string(), row.line, "expected form, tag, class");
    SuffixEntry e{strip_dash(row.fields[0]), row.fields[1], {}};
    try {
      e.cls = parse_suffix_class(row.fields[2]);
    } catch (const InvalidArgument& ex) {
      throw ParseError(path.string(), row.line, ex.what());
    }
    if (e.form.empty() || e.tag.empty()) throw ParseError(path.string(), row.line, "empty form or tag");
    inv.push_back(std::move(e));
  }
  return inv;
}

LemmaLexicon load_lemma_lexicon(const std::filesystem::path& path) {
  LemmaLexicon lex;
  for (const auto& row : read_tsv(path, "lemma")) {
    if (row.fields.empty() || row.fields[0].empty())
      throw ParseError(path.string(), row.line, "empty lemma");
    lex.add(row.fields[0], row.fields.size() > 1 && !row.fields[1].empty() ? row.fields[1]
                                                                          : std::string(kDefaultPos));
  }
  return lex;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  for (const auto& raw : split_whitespace(text)) {
    auto chars = utf8_chars(utf8_lower(raw));
    std::size_t b = 0, e = chars.size();
    while (b < e && is_edge_punct(chars[b])) ++b;
    while (e > b && is_edge_punct(chars[e - 1])) --e;
    std::string tok;
    for (std::size_t i = b; i < e; ++i)
      tok += (chars[i] == "\xE2\x80\x99" || chars[i] == "\xE2\x80\x98") ? std::string("'") : chars[i];
    if (!tok.empty()) out.push_back(std::move(tok));
  }
  return out;
}

std::string standardize_suffixes(std::string_view token, std::span<const SuffixRule> rules,
                                 std::span<const SuffixEntry> inventory, const LemmaLexicon* lexicon) {
  std::string stem(token);
  std::vector<std::string> peeled;  // right to left
  for (;;) {
    if (lexicon && lexicon->contains(stem)) break;
    std::string_view best_form;
    std::string_view best_out;
    for (const auto& rule : rules) {
      auto consider = [&](std::string_view form) {
        if (form.size() <= best_form.size() || !std::string_view(stem).ends_with(form)) return;
        auto rest = std::string_view(stem).substr(0, stem.size() - form.size());
        if (char_count(rest) < kMinStemChars) return;
        if (rule.after_vowel && !ends_with_vowel(rest)) return;
        best_form = form;
        best_out = rule.standard;
      };
      consider(rule.standard);
      for (const auto& v : rule.variants) consider(v);
    }
    for (const auto& entry : inventory) {
      std::string_view form = entry.form;
      if (form.size() <= best_form.size() || !std::string_view(stem).ends_with(form)) continue;
      if (char_count(std::string_view(stem).substr(0, stem.size() - form.size())) < kMinStemChars)
        continue;
      best_form = form;
      best_out = form;
    }
    if (best_form.empty()) break;
    peeled.emplace_back(best_out);
    stem.resize(stem.size() - best_form.size());
  }
  for (auto it = peeled.rbegin(); it != peeled.rend(); ++it) stem += *it;
  return stem;
}

MorphToken segment(std::string_view token, std::span<const SuffixEntry> inventory,
                   const LemmaLexicon& lexicon) {
  MorphToken out;
  out.surface = std::string(token);
  std::string stem(token);
  std::vector<SuffixEntry> stripped;  // right to left
  while (!lexicon.contains(stem)) {
    const SuffixEntry* best = nullptr;
    for (const auto& e : inventory) {
      if (best && e.form.size() <= best->form.size()) continue;
      if (!std::string_view(stem).ends_with(e.form)) continue;
      if (char_count(std::string_view(stem).substr(0, stem.size() - e.form.size())) < kMinStemChars)
        continue;
      best = &e;
    }
    if (!best) break;
    stripped.push_back(*best);
    stem.resize(stem.size() - best->form.size());
  }
  out.lemma = stem;
  out.suffixes.assign(stripped.rbegin(), stripped.rend());
  auto pos = lexicon.pos(stem);
  out.pos = pos.empty() ? std::string(kDefaultPos) : pos;
  return out;
}

Analyzer::Analyzer(std::vector<SuffixRule> rules, std::vector<SuffixEntry> inventory,
                   LemmaLexicon lexicon)
    : rules_(std::move(rules)), inventory_(std::move(inventory)), lexicon_(std::move(lexicon)) {
  if (inventory_.empty()) throw InvalidArgument("suffix inventory is empty");
}

Analyzer Analyzer::load(const std::filesystem::path& rules, const std::filesystem::path& inventory,
                        const std::filesystem::path& lexicon) {
  return Analyzer(load_suffix_rules(rules), load_suffix_inventory(inventory),
                  load_lemma_lexicon(lexicon));
}

std::string Analyzer::normalize_token(std::string_view token) const {
  return standardize_suffixes(token, rules_, inventory_, &lexicon_);
}

std::vector<std::string> Analyzer::normalize(std::string_view text) const {
  auto toks = tokenize(text);
  for (auto& t : toks) t = normalize_token(t);
  return toks;
}

MorphToken Analyzer::analyze_token(std::string_view token) const {
  return segment(token, inventory_, lexicon_);
}

std::vector<MorphToken> Analyzer::analyze(std::string_view text) const {
  std::vector<MorphToken> out;
  for (const auto& t : normalize(text)) out.push_back(analyze_token(t));
  return out;
}

std::vector<std::string> Analyzer::morphemes(std::string_view text) const {
  std::vector<std::string> out;
  for (const auto& mt : analyze(text))
    for (auto& m : mt.morphemes()) out.push_back(std::move(m));
  return out;
}

}  // namespace qaug::morph
