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

#include "qaug/textgen.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>

#include "qaug/random.hpp"
#include "qaug/text_io.hpp"

namespace qaug::textgen {

using delex::DelexSentence;

void GenerationConfig::validate() const {
  if (!(diversity_floor >= 0.0 && diversity_floor <= 1.0))
    throw InvalidArgument("diversity_floor must lie in [0,1]");
  if (markov_order < 1) throw InvalidArgument("markov_order must be >= 1");
  if (max_len < 1) throw InvalidArgument("max_len must be >= 1");
  if (attempts_per_output < 1) throw InvalidArgument("attempts_per_output must be >= 1");
}

namespace {

using Bigram = std::pair<std::string, std::string>;

std::set<Bigram> bigrams(const std::vector<std::string>& items) {
  std::set<Bigram> out;
  for (std::size_t i = 1; i < items.size(); ++i) out.emplace(items[i - 1], items[i]);
  return out;
}

double score_items(const std::vector<std::string>& c, const std::vector<std::string>& o) {
  if (c.empty() || o.empty()) throw EmptySentence();
  auto bc = bigrams(c);
  auto bo = bigrams(o);
  if (bc.empty() && bo.empty()) return c == o ? 0.0 : 1.0;
  std::size_t inter = 0;
  for (const auto& b : bc) inter += bo.contains(b);
  const std::size_t uni = bc.size() + bo.size() - inter;
  return 1.0 - static_cast<double>(inter) / static_cast<double>(uni);
}

constexpr const char* kBegin = "<s>";
constexpr const char* kEnd = "</s>";

}  // namespace

double diversity_score(const DelexSentence& candidate, const DelexSentence& original) {
  return score_items(candidate.rendered_items(), original.rendered_items());
}

std::vector<RankedCandidate> rank_candidates(std::span<const DelexSentence> candidates,
                                             std::span<const DelexSentence> originals,
                                             double floor) {
  if (originals.empty()) throw InvalidArgument("rank_candidates: no originals");
  std::vector<std::vector<std::string>> orig_items;
  orig_items.reserve(originals.size());
  for (const auto& o : originals) orig_items.push_back(o.rendered_items());

  std::vector<std::pair<RankedCandidate, std::string>> scored;
  for (const auto& c : candidates) {
    auto items = c.rendered_items();
    double best = std::numeric_limits<double>::infinity();
    std::size_t nearest = 0;
    for (std::size_t i = 0; i < orig_items.size(); ++i) {
      double s = score_items(items, orig_items[i]);
      if (s < best) {
        best = s;
        nearest = i;
      }
    }
    if (best < floor) continue;
    scored.push_back({RankedCandidate{c, originals[nearest].origin_id, best}, join(items, " ")});
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    if (a.first.dissimilarity != b.first.dissimilarity)
      return a.first.dissimilarity > b.first.dissimilarity;
    return a.second < b.second;
  });
  std::vector<RankedCandidate> out;
  out.reserve(scored.size());
  for (auto& s : scored) out.push_back(std::move(s.first));
  return out;
}

namespace {

// Transition table keyed by the last order_ rendered items.
class MarkovChain {
 public:
  MarkovChain(std::span<const DelexSentence> corpus, std::size_t order) : order_(order) {
    for (const auto& s : corpus) {
      std::vector<std::string> hist(order_, kBegin);
      for (std::size_t i = 0; i < s.items.size(); ++i) {
        auto r = delex::render(s.items[i]);
        alphabet_.try_emplace(r, s.items[i]);
        ++table_[hist][r];
        hist.erase(hist.begin());
        hist.push_back(std::move(r));
      }
      ++table_[hist][kEnd];
    }
  }

  DelexSentence sample(Rng& rng, std::size_t max_len) const {
    DelexSentence out;
    std::vector<std::string> hist(order_, kBegin);
    while (out.items.size() < max_len) {
      auto it = table_.find(hist);
      if (it == table_.end()) break;
      std::size_t total = 0;
      for (const auto& [_, n] : it->second) total += n;
      std::size_t r = rng.below(total);
      const std::string* next = nullptr;
      for (const auto& [item, n] : it->second) {
        if (r < n) {
          next = &item;
          break;
        }
        r -= n;
      }
      if (*next == kEnd) break;
      out.items.push_back(alphabet_.at(*next));
      hist.erase(hist.begin());
      hist.push_back(*next);
    }
    return out;
  }

 private:
  std::size_t order_;
  std::map<std::vector<std::string>, std::map<std::string, std::size_t>> table_;
  std::unordered_map<std::string, delex::Item> alphabet_;
};

}  // namespace

std::vector<DelexSentence> generate_templates(std::span<const DelexSentence> corpus,
                                              const GenerationConfig& cfg) {
  cfg.validate();
  if (corpus.empty()) throw CorpusEmpty();
  if (cfg.count == 0) return {};

  MarkovChain chain(corpus, cfg.markov_order);
  std::vector<DelexSentence> accepted;
  const std::size_t max_attempts = cfg.count * cfg.attempts_per_output;
  for (std::size_t attempt = 0; attempt < max_attempts && accepted.size() < cfg.count; ++attempt) {
    Rng rng(derive_seed(cfg.seed, attempt));
    auto s = chain.sample(rng, cfg.max_len);
    if (s.items.empty()) continue;
    std::span<const DelexSentence> one(&s, 1);
    if (rank_candidates(one, corpus, cfg.diversity_floor).empty()) continue;
    accepted.push_back(std::move(s));
  }
  auto ranked = rank_candidates(accepted, corpus, cfg.diversity_floor);
  std::vector<DelexSentence> out;
  out.reserve(ranked.size());
  for (auto& r : ranked) out.push_back(std::move(r.sentence));
  return out;
}

std::vector<std::string> realize_tokens(const DelexSentence& tmpl,
                                        const delex::SlotVocabulary& vocab, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(tmpl.items.size());
  for (const auto& item : tmpl.items) {
    if (const auto* lit = std::get_if<delex::Literal>(&item)) {
      out.push_back(lit->token);
      continue;
    }
    const auto& frame = std::get<delex::SlotLabel>(item).frame;
    const auto& words = vocab.words(frame);
    if (words.empty()) throw EmptyFrameVocab(frame);
    out.push_back(words[rng.below(words.size())]);
  }
  return out;
}

std::string realize(const DelexSentence& tmpl, const delex::SlotVocabulary& vocab,
                    std::uint64_t seed) {
  return join(realize_tokens(tmpl, vocab, seed), " ");
}

std::set<std::string> frames_of(std::span<const DelexSentence> corpus) {
  std::set<std::string> out;
  for (const auto& s : corpus)
    for (const auto& item : s.items)
      if (const auto* slot = std::get_if<delex::SlotLabel>(&item)) out.insert(slot->frame);
  return out;
}

ExternalGeneration external_generate(ExternalProcessClient& client,
                                     std::span<const DelexSentence> corpus, std::size_t count) {
  using json = nlohmann::json;
  const auto known = frames_of(corpus);
  json req;
  req["cmd"] = "generate";
  req["count"] = count;
  req["corpus"] = json::array();
  for (const auto& s : corpus) req["corpus"].push_back(s.render());
  client.send_line(req.dump());

  ExternalGeneration out;
  std::size_t line_no = 0, responses = 0;
  for (;;) {
    auto line = client.read_line();
    ++line_no;
    if (!line) throw ProtocolError(line_no, "adapter closed its output before the terminator");
    json msg;
    try {
      msg = json::parse(*line);
    } catch (const json::exception&) {
      throw ProtocolError(line_no, "not JSON: " + *line);
    }
    if (!msg.is_object()) throw ProtocolError(line_no, "expected a JSON object: " + *line);
    if (msg.contains("done")) {
      if (msg["done"] != true) throw ProtocolError(line_no, "bad terminator: " + *line);
      break;
    }
    if (msg.contains("error"))
      throw ProtocolError(line_no, "adapter error: " + msg["error"].dump());
    auto it = msg.find("template");
    if (it == msg.end() || !it->is_string())
      throw ProtocolError(line_no, "missing string field 'template': " + *line);
    if (++responses > count)
      throw ProtocolError(line_no, "adapter sent more than the requested " + std::to_string(count) + " templates");
    DelexSentence s;
    try {
      s = delex::parse_template(it->get<std::string>());
    } catch (const ParseError& e) {
      out.rejects.push_back({line_no, e.what()});
      continue;
    }
    if (s.items.empty()) {
      out.rejects.push_back({line_no, "empty template"});
      continue;
    }
    std::string unknown;
    for (const auto& item : s.items)
      if (const auto* slot = std::get_if<delex::SlotLabel>(&item); slot && !known.contains(slot->frame))
        unknown = slot->frame;
    if (!unknown.empty()) {
      out.rejects.push_back({line_no, "UnknownFrame(" + unknown + ")"});
      continue;
    }
    out.templates.push_back(std::move(s));
  }
  if (responses != count)
    throw ProtocolError(line_no, "adapter sent " + std::to_string(responses) + " templates, expected " +
                                     std::to_string(count));
  return out;
}

}  // namespace qaug::textgen
