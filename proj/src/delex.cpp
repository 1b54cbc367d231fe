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

#include "qaug/delex.hpp"

#include <algorithm>
#include <cctype>

#include "qaug/text_io.hpp"

namespace qaug::delex {

namespace {

std::string key(std::string_view s) { return utf8_lower(trim(s)); }

}  // namespace

void LemmaMap::add(std::string_view lemma, std::string value) {
  entries_.insert_or_assign(key(lemma), std::move(value));
}

std::optional<std::string> LemmaMap::find(std::string_view lemma) const {
  auto it = entries_.find(key(lemma));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

LemmaMap load_lemma_map(const std::filesystem::path& path, std::string_view header_key) {
  LemmaMap m(path.string());
  for (const auto& row : read_tsv(path, header_key)) {
    if (row.fields.size() < 2 || row.fields[0].empty() || row.fields[1].empty())
      throw ParseError(path.string(), row.line, "expected two non-empty columns");
    m.add(row.fields[0], row.fields[1]);
  }
  return m;
}

std::string render(const Item& item) {
  if (const auto* lit = std::get_if<Literal>(&item)) return lit->token;
  return std::get<SlotLabel>(item).render();
}

std::vector<std::string> DelexSentence::rendered_items() const {
  std::vector<std::string> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(delex::render(it));
  return out;
}

std::string DelexSentence::render() const { return join(rendered_items(), " "); }

std::size_t DelexSentence::slot_count() const {
  return static_cast<std::size_t>(std::count_if(items.begin(), items.end(), [](const Item& i) {
    return std::holds_alternative<SlotLabel>(i);
  }));
}

DelexSentence parse_template(std::string_view rendered) {
  DelexSentence s;
  std::size_t i = 0;
  const auto n = rendered.size();
  auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (i < n) {
    while (i < n && is_space(rendered[i])) ++i;
    if (i >= n) break;
    if (rendered[i] == '<') {
      auto close = rendered.find('>', i);
      if (close == std::string_view::npos)
        throw ParseError("template", 0, "unterminated slot in '" + std::string(rendered) + "'");
      auto parts = split_whitespace(rendered.substr(i + 1, close - i - 1));
      if (parts.size() != 2 || !parts[0].starts_with("B-"))
        throw ParseError("template", 0,
                         "slot must read <B-role frame>: '" +
                             std::string(rendered.substr(i, close - i + 1)) + "'");
      s.items.emplace_back(SlotLabel{parts[0], parts[1]});
      i = close + 1;
    } else {
      std::size_t j = i;
      while (j < n && !is_space(rendered[j]) && rendered[j] != '<') ++j;
      s.items.emplace_back(Literal{std::string(rendered.substr(i, j - i))});
      i = j;
    }
  }
  return s;
}

std::vector<std::string> realize_with_fills(const DelexSentence& s) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < s.items.size(); ++i) {
    if (const auto* lit = std::get_if<Literal>(&s.items[i])) {
      out.push_back(lit->token);
      continue;
    }
    auto it = s.fills.find(i);
    if (it == s.fills.end())
      throw InvalidArgument("slot at position " + std::to_string(i) + " has no fill");
    out.push_back(it->second);
  }
  return out;
}

std::optional<std::string> lookup_frame(std::string_view lemma, const FrameLexicon& primary,
                                        const BilingualMap& bridge, const FrameLexicon& pivot) {
  if (auto f = primary.find(lemma)) return f;
  if (auto pivot_word = bridge.find(lemma)) return pivot.find(*pivot_word);
  return std::nullopt;
}

std::vector<std::string> select_frames(std::span<const TaggedSentence> corpus, std::size_t k) {
  if (k == 0) throw InvalidArgument("select_frames: k must be >= 1");
  std::map<std::string, std::size_t> freq;
  for (const auto& sent : corpus)
    for (const auto& f : sent)
      if (f) ++freq[*f];
  std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
  // std::map order is alphabetical, so a stable sort on count keeps ties a-z.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
  return out;
}

std::string RoleAssigner::role(std::string_view lemma, std::string_view frame) const {
  if (auto r = lexicon_.find(lemma)) return *r;
  return "B-" + std::string(frame);
}

namespace {

template <typename RoleFn>
DelexResult delexicalize_impl(std::span<const morph::MorphToken> tokens,
                              std::span<const std::optional<std::string>> frames,
                              const std::set<std::string>& selected, RoleFn&& role_of,
                              std::string origin_id) {
  if (frames.size() != tokens.size())
    throw InvalidArgument("delexicalize: one frame entry per token required");
  DelexResult out;
  out.sentence.origin_id = std::move(origin_id);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto& tok = tokens[i];
    if (frames[i] && selected.contains(*frames[i])) {
      const auto& frame = *frames[i];
      out.sentence.items.emplace_back(SlotLabel{role_of(tok, frame), frame});
      out.sentence.fills[i] = tok.surface;
      out.harvest[frame].push_back(tok.surface);
    } else {
      out.sentence.items.emplace_back(Literal{tok.surface});
    }
  }
  return out;
}

}  // namespace

DelexResult delexicalize(std::span<const morph::MorphToken> tokens,
                         std::span<const std::optional<std::string>> frames,
                         const std::set<std::string>& selected,
                         const std::map<std::string, std::string>& role_map,
                         std::string origin_id) {
  for (const auto& f : selected)
    if (!role_map.contains(f)) throw MissingRole(f);
  return delexicalize_impl(
      tokens, frames, selected,
      [&](const morph::MorphToken&, const std::string& frame) { return role_map.at(frame); },
      std::move(origin_id));
}

DelexResult delexicalize(std::span<const morph::MorphToken> tokens,
                         std::span<const std::optional<std::string>> frames,
                         const std::set<std::string>& selected, const RoleAssigner& roles,
                         std::string origin_id) {
  return delexicalize_impl(
      tokens, frames, selected,
      [&](const morph::MorphToken& t, const std::string& frame) {
        return roles.role(t.lemma, frame);
      },
      std::move(origin_id));
}

void SlotVocabulary::add(const std::string& frame, const std::string& word) {
  if (seen_[frame].insert(word).second) by_frame_[frame].push_back(word);
}

void SlotVocabulary::merge(const Harvest& h) {
  for (const auto& [frame, words] : h)
    for (const auto& w : words) add(frame, w);
}

const std::vector<std::string>& SlotVocabulary::words(const std::string& frame) const {
  static const std::vector<std::string> kEmpty;
  auto it = by_frame_.find(frame);
  return it == by_frame_.end() ? kEmpty : it->second;
}

bool SlotVocabulary::has(const std::string& frame) const { return by_frame_.contains(frame); }

std::vector<std::string> SlotVocabulary::frames() const {
  std::vector<std::string> out;
  for (const auto& [f, _] : by_frame_) out.push_back(f);
  return out;
}

std::string SlotVocabulary::to_tsv() const {
  std::string out;
  for (const auto& [frame, words] : by_frame_)
    for (const auto& w : words) out += frame + "\t" + w + "\n";
  return out;
}

SlotVocabulary SlotVocabulary::from_tsv(const std::filesystem::path& path) {
  SlotVocabulary v;
  for (const auto& row : read_tsv(path, "frame")) {
    if (row.fields.size() < 2) throw ParseError(path.string(), row.line, "expected frame, word");
    v.add(row.fields[0], row.fields[1]);
  }
  return v;
}

SlotVocabulary build_slot_vocab(std::span<const DelexResult> results) {
  SlotVocabulary v;
  for (const auto& r : results) {
    // Per-sentence harvest is keyed by frame; walk the sentence to keep
    // first-seen order across frames stable.
    for (std::size_t i = 0; i < r.sentence.items.size(); ++i) {
      if (const auto* slot = std::get_if<SlotLabel>(&r.sentence.items[i])) {
        auto fill = r.sentence.fills.find(i);
        if (fill != r.sentence.fills.end()) v.add(slot->frame, fill->second);
      }
    }
    v.merge(r.harvest);
  }
  return v;
}

}  // namespace qaug::delex
