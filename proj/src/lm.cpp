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

#include "qaug/lm.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "qaug/error.hpp"
#include "qaug/random.hpp"
#include "qaug/text_io.hpp"

namespace qaug::lm {

std::vector<Sentence> read_sentences(std::string_view text) {
  std::vector<Sentence> out;
  for (const auto& line : split(text, '\n')) {
    auto toks = split_whitespace(line);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

std::size_t round_half_up(double x) {
  // The epsilon absorbs products like 0.04 * 50 landing a hair below an
  // exact half.
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

namespace {

bool is_special(std::string_view w) { return w == kUnk || w == kBos || w == kEos; }

}  // namespace

std::pair<std::vector<Sentence>, PruningReport> apply_singleton_pruning(
    std::span<const Sentence> corpus, double kappa, std::uint64_t seed) {
  if (!(kappa >= 0.0 && kappa <= 1.0)) throw InvalidArgument("kappa must lie in [0,1]");
  std::map<std::string, std::size_t> freq;
  for (const auto& s : corpus)
    for (const auto& w : s)
      if (!is_special(w)) ++freq[w];
  std::vector<std::string> hapax;
  for (const auto& [w, n] : freq)
    if (n == 1) hapax.push_back(w);

  PruningReport report;
  report.hapax_total = hapax.size();
  report.kappa = kappa;
  const std::size_t take = std::min(hapax.size(), round_half_up(kappa * static_cast<double>(hapax.size())));
  Rng rng(seed);
  rng.shuffle(hapax.begin(), hapax.end());
  std::set<std::string> chosen(hapax.begin(), hapax.begin() + static_cast<std::ptrdiff_t>(take));
  report.replaced.assign(chosen.begin(), chosen.end());

  std::vector<Sentence> out(corpus.begin(), corpus.end());
  for (auto& s : out)
    for (auto& w : s)
      if (chosen.contains(w)) w = std::string(kUnk);
  return {std::move(out), std::move(report)};
}

Discounts estimate_discounts(const std::array<std::uint64_t, 4>& nk) {
  Discounts d;
  if (nk[0] == 0 || nk[1] == 0 || nk[2] == 0 || nk[3] == 0) {
    d.d1 = d.d2 = d.d3 = kFallbackDiscount;
    d.fallback = true;
    return d;
  }
  const double n1 = static_cast<double>(nk[0]), n2 = static_cast<double>(nk[1]),
               n3 = static_cast<double>(nk[2]), n4 = static_cast<double>(nk[3]);
  const double y = n1 / (n1 + 2.0 * n2);
  auto clamp = [](double v, double k) { return std::clamp(v, 0.0, std::nextafter(k, 0.0)); };
  d.d1 = clamp(1.0 - 2.0 * y * n2 / n1, 1.0);
  d.d2 = clamp(2.0 - 3.0 * y * n3 / n2, 2.0);
  d.d3 = clamp(3.0 - 4.0 * y * n4 / n3, 3.0);
  return d;
}

NGramLM NGramLM::train(std::span<const Sentence> corpus, const TrainConfig& cfg) {
  if (cfg.order < 1) throw InvalidArgument("order must be >= 1");
  if (corpus.empty()) throw InvalidArgument("training corpus is empty");

  NGramLM lm;
  lm.order_ = cfg.order;
  auto [pruned, report] = apply_singleton_pruning(corpus, cfg.kappa, cfg.seed);
  lm.pruning_ = std::move(report);

  std::set<std::string> types{std::string(kUnk), std::string(kBos), std::string(kEos)};
  for (const auto& s : pruned)
    for (const auto& w : s) types.insert(w);
  for (const auto& w : types) {
    lm.ids_.emplace(w, static_cast<Id>(lm.words_.size()));
    lm.words_.push_back(w);
    if (w != kBos) lm.vocab_.push_back(w);
  }
  lm.unk_ = lm.ids_.at(std::string(kUnk));
  lm.bos_ = lm.ids_.at(std::string(kBos));
  const Id eos = lm.ids_.at(std::string(kEos));

  const auto n = static_cast<std::size_t>(cfg.order);
  lm.counts_.assign(n + 1, {});
  lm.context_stats_.assign(n + 1, {});
  lm.discounts_.assign(n + 1, {});

  // Highest order: raw counts over padded sentences.
  for (const auto& s : pruned) {
    Key padded(n - 1, lm.bos_);
    for (const auto& w : s) padded.push_back(lm.ids_.at(w));
    padded.push_back(eos);
    for (std::size_t end = n - 1; end < padded.size(); ++end)
      ++lm.counts_[n][Key(padded.begin() + static_cast<std::ptrdiff_t>(end + 1 - n),
                          padded.begin() + static_cast<std::ptrdiff_t>(end + 1))];
  }
  // Lower orders: number of distinct left extensions.
  for (std::size_t k = n - 1; k >= 1; --k) {
    for (const auto& [key, _] : lm.counts_[k + 1]) ++lm.counts_[k][Key(key.begin() + 1, key.end())];
  }

  for (std::size_t k = 1; k <= n; ++k) {
    std::array<std::uint64_t, 4> coc{};
    for (const auto& [key, c] : lm.counts_[k]) {
      if (c >= 1 && c <= 4) ++coc[c - 1];
      auto& st = lm.context_stats_[k][Key(key.begin(), key.end() - 1)];
      st.total += c;
      ++st.n[std::min<std::uint64_t>(c, 3) - 1];
    }
    lm.discounts_[k] = estimate_discounts(coc);
  }
  return lm;
}

bool NGramLM::in_vocab(std::string_view w) const {
  return w != kBos && ids_.contains(std::string(w));
}

std::vector<int> NGramLM::degenerate_orders() const {
  std::vector<int> out;
  for (int k = 1; k <= order_; ++k)
    if (discounts_[static_cast<std::size_t>(k)].fallback) out.push_back(k);
  return out;
}

NGramLM::Id NGramLM::id_of(std::string_view w) const {
  auto it = ids_.find(std::string(w));
  return it == ids_.end() ? unk_ : it->second;
}

std::uint64_t NGramLM::count(std::span<const std::string> ngram) const {
  if (ngram.empty() || ngram.size() > static_cast<std::size_t>(order_)) return 0;
  Key key;
  for (const auto& w : ngram) {
    auto it = ids_.find(w);
    if (it == ids_.end()) return 0;
    key.push_back(it->second);
  }
  const auto& table = counts_[ngram.size()];
  auto it = table.find(key);
  return it == table.end() ? 0 : it->second;
}

std::size_t NGramLM::ngram_types(int k) const { return counts_.at(static_cast<std::size_t>(k)).size(); }

std::vector<std::pair<std::vector<std::string>, std::uint64_t>> NGramLM::ngrams(int k) const {
  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> out;
  for (const auto& [key, c] : counts_.at(static_cast<std::size_t>(k))) {
    std::vector<std::string> words;
    for (Id id : key) words.push_back(words_[id]);
    out.emplace_back(std::move(words), c);
  }
  return out;
}

std::vector<std::vector<std::string>> NGramLM::contexts(int k) const {
  std::vector<std::vector<std::string>> out;
  for (const auto& [key, _] : context_stats_.at(static_cast<std::size_t>(k))) {
    std::vector<std::string> words;
    for (Id id : key) words.push_back(words_[id]);
    out.push_back(std::move(words));
  }
  return out;
}

double NGramLM::backoff_weight(int k, const Key& context) const {
  const auto& stats = context_stats_[static_cast<std::size_t>(k)];
  auto it = stats.find(context);
  if (it == stats.end() || it->second.total == 0) return 1.0;
  const auto& d = discounts_[static_cast<std::size_t>(k)];
  const auto& st = it->second;
  return (d.d1 * static_cast<double>(st.n[0]) + d.d2 * static_cast<double>(st.n[1]) +
          d.d3 * static_cast<double>(st.n[2])) /
         static_cast<double>(st.total);
}

double NGramLM::prob_ids(Id word, const Key& history) const {
  const auto k = history.size() + 1;
  const double lower =
      k == 1 ? 1.0 / static_cast<double>(vocab_.size()) : prob_ids(word, Key(history.begin() + 1, history.end()));
  auto st = context_stats_[k].find(history);
  if (st == context_stats_[k].end() || st->second.total == 0) return lower;
  Key full = history;
  full.push_back(word);
  auto cit = counts_[k].find(full);
  const std::uint64_t c = cit == counts_[k].end() ? 0 : cit->second;
  const double total = static_cast<double>(st->second.total);
  const double discounted = std::max(static_cast<double>(c) - discounts_[k].for_count(c), 0.0) / total;
  return discounted + backoff_weight(static_cast<int>(k), history) * lower;
}

double NGramLM::prob(std::string_view word, std::span<const std::string> context) const {
  const auto keep = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
  Key history;
  for (std::size_t i = context.size() - keep; i < context.size(); ++i) history.push_back(id_of(context[i]));
  Id w = id_of(word);
  if (w == bos_) return 0.0;
  return prob_ids(w, history);
}

double NGramLM::log_prob(std::string_view word, std::span<const std::string> context) const {
  return std::log(prob(word, context));
}

double NGramLM::perplexity(std::span<const Sentence> eval) const {
  double sum = 0;
  std::size_t tokens = 0;
  for (const auto& s : eval) {
    std::vector<std::string> ctx(static_cast<std::size_t>(order_ - 1), std::string(kBos));
    auto score = [&](const std::string& w) {
      sum += log_prob(w, ctx);
      ++tokens;
      ctx.push_back(w);
    };
    for (const auto& w : s) score(w);
    score(std::string(kEos));
  }
  if (tokens == 0) throw InvalidArgument("perplexity: evaluation set is empty");
  return std::exp(-sum / static_cast<double>(tokens));
}

namespace {

constexpr double kNoProb = -99.0;

std::string fmt_log(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

}  // namespace

std::string NGramLM::to_arpa() const {
  // Entries per order: every stored n-gram, plus contexts of the next order
  // that are not n-grams themselves (e.g. "<s> <s>"), listed with -99.
  std::vector<std::map<Key, std::pair<double, std::optional<double>>>> listing(
      static_cast<std::size_t>(order_) + 1);
  for (int k = 1; k <= order_; ++k) {
    auto& out = listing[static_cast<std::size_t>(k)];
    if (k == 1) {
      for (const auto& w : vocab_) out[Key{ids_.at(w)}].first = std::log10(prob_ids(ids_.at(w), {}));
    } else {
      for (const auto& [key, _] : counts_[static_cast<std::size_t>(k)])
        out[key].first = std::log10(prob_ids(key.back(), Key(key.begin(), key.end() - 1)));
    }
  }
  for (int k = 2; k <= order_; ++k) {
    for (const auto& [ctx, st] : context_stats_[static_cast<std::size_t>(k)]) {
      auto& out = listing[static_cast<std::size_t>(k - 1)];
      auto it = out.find(ctx);
      if (it == out.end()) it = out.emplace(ctx, std::make_pair(kNoProb, std::nullopt)).first;
      it->second.second = std::log10(backoff_weight(k, ctx));
    }
  }

  std::string text = "\\data\\\n";
  for (int k = 1; k <= order_; ++k)
    text += "ngram " + std::to_string(k) + "=" + std::to_string(listing[static_cast<std::size_t>(k)].size()) + "\n";
  for (int k = 1; k <= order_; ++k) {
    text += "\n\\" + std::to_string(k) + "-grams:\n";
    for (const auto& [key, entry] : listing[static_cast<std::size_t>(k)]) {
      text += fmt_log(entry.first) + "\t";
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) text += ' ';
        text += words_[key[i]];
      }
      if (entry.second) text += "\t" + fmt_log(*entry.second);
      text += "\n";
    }
  }
  text += "\n\\end\\\n";
  return text;
}

ArpaModel ArpaModel::parse(std::string_view text) {
  ArpaModel m;
  int section = 0;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.starts_with('#')) continue;
    if (line == "\\data\\") continue;
    if (line == "\\end\\") break;
    if (line.starts_with("ngram ")) {
      auto eq = line.find('=');
      m.order_ = std::max(m.order_, std::stoi(std::string(line.substr(6, eq - 6))));
      continue;
    }
    if (line.starts_with('\\') && line.ends_with("-grams:")) {
      section = std::stoi(std::string(line.substr(1)));
      continue;
    }
    auto fields = split(line, '\t');
    if (section == 0 || fields.size() < 2) throw ParseError("arpa", line_no, "unexpected line");
    auto words = split_whitespace(fields[1]);
    if (static_cast<int>(words.size()) != section)
      throw ParseError("arpa", line_no, "n-gram length does not match section");
    Entry e;
    e.log10_prob = std::stod(fields[0]);
    e.has_prob = e.log10_prob > kNoProb;
    if (fields.size() > 2) e.log10_backoff = std::stod(fields[2]);
    m.entries_[words] = e;
  }
  if (m.order_ == 0) throw ParseError("arpa", 0, "no \\data\\ header");
  return m;
}

double ArpaModel::log10_prob(std::vector<std::string> ngram) const {
  auto it = entries_.find(ngram);
  if (it != entries_.end() && it->second.has_prob) return it->second.log10_prob;
  if (ngram.size() == 1) return kNoProb;
  std::vector<std::string> ctx(ngram.begin(), ngram.end() - 1);
  auto cit = entries_.find(ctx);
  const double bo = cit == entries_.end() ? 0.0 : cit->second.log10_backoff;
  ngram.erase(ngram.begin());
  return bo + log10_prob(std::move(ngram));
}

double ArpaModel::prob(std::string_view word, std::span<const std::string> context) const {
  auto known = [&](const std::string& w) {
    return entries_.contains(std::vector<std::string>{w}) ? w : std::string(kUnk);
  };
  const auto keep = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
  std::vector<std::string> ngram;
  for (std::size_t i = context.size() - keep; i < context.size(); ++i) ngram.push_back(known(context[i]));
  ngram.push_back(known(std::string(word)));
  return std::pow(10.0, log10_prob(std::move(ngram)));
}

double ArpaModel::perplexity(std::span<const Sentence> eval) const {
  double sum = 0;
  std::size_t tokens = 0;
  for (const auto& s : eval) {
    std::vector<std::string> ctx(static_cast<std::size_t>(order_ - 1), std::string(kBos));
    for (std::size_t i = 0; i <= s.size(); ++i) {
      const std::string w = i < s.size() ? s[i] : std::string(kEos);
      sum += std::log(prob(w, ctx));
      ++tokens;
      ctx.push_back(w);
    }
  }
  if (tokens == 0) throw InvalidArgument("perplexity: evaluation set is empty");
  return std::exp(-sum / static_cast<double>(tokens));
}

}  // namespace qaug::lm
