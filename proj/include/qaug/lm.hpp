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

#ifndef QAUG_LM_HPP_
#define QAUG_LM_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qaug::lm {

inline constexpr std::string_view kUnk = "<unk>";
inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";

using Sentence = std::vector<std::string>;

// Whitespace-tokenized, one sentence per line; blank lines skipped.
std::vector<Sentence> read_sentences(std::string_view text);

std::size_t round_half_up(double x);

struct PruningReport {
  std::size_t hapax_total = 0;
  std::vector<std::string> replaced;  // sorted
  double kappa = 0;
};

// Replaces round_half_up(kappa * H) of the H once-occurring word types,
// chosen uniformly without replacement, by <unk>.
std::pair<std::vector<Sentence>, PruningReport> apply_singleton_pruning(
    std::span<const Sentence> corpus, double kappa, std::uint64_t seed);

struct TrainConfig {
  int order = 4;
  double kappa = 0.04;
  std::uint64_t seed = 0;
};

// Modified Kneser-Ney discounts of one order: D1, D2 and D3+.
struct Discounts {
  double d1 = 0.75;
  double d2 = 0.75;
  double d3 = 0.75;
  bool fallback = false;  // some count-of-count was zero; fixed 0.75 used

  double for_count(std::uint64_t c) const { return c == 0 ? 0.0 : c == 1 ? d1 : c == 2 ? d2 : d3; }
};

inline constexpr double kFallbackDiscount = 0.75;

// Computes D1..D3+ from the counts n1..n4 of n-grams seen exactly 1..4
// times, clamping Dk to [0, k).
Discounts estimate_discounts(const std::array<std::uint64_t, 4>& count_of_counts);

// Interpolated modified Kneser-Ney n-gram model. The highest order uses raw
// counts; lower orders use continuation counts (number of distinct words
// seen to the left). Order 0 is uniform over the predictable vocabulary:
// every training type except <s>, plus </s> and <unk>.
class NGramLM {
 public:
  static NGramLM train(std::span<const Sentence> corpus, const TrainConfig& cfg);

  int order() const { return order_; }
  // Predictable vocabulary, sorted.
  const std::vector<std::string>& vocab() const { return vocab_; }
  bool in_vocab(std::string_view w) const;
  const Discounts& discounts(int k) const { return discounts_.at(static_cast<std::size_t>(k)); }
  std::vector<int> degenerate_orders() const;
  const PruningReport& pruning() const { return pruning_; }

  // Adjusted count of an n-gram of length k (raw at the top order,
  // continuation count below). 0 when unseen.
  std::uint64_t count(std::span<const std::string> ngram) const;
  std::size_t ngram_types(int k) const;
  // All n-grams of length k with their adjusted counts, in sorted id order.
  std::vector<std::pair<std::vector<std::string>, std::uint64_t>> ngrams(int k) const;
  // Contexts (length k-1) with at least one continuation at order k.
  std::vector<std::vector<std::string>> contexts(int k) const;

  // P(word | context). Only the last order-1 context words are used; unknown
  // words map to <unk>.
  double prob(std::string_view word, std::span<const std::string> context) const;
  // Natural log of prob.
  double log_prob(std::string_view word, std::span<const std::string> context) const;

  // exp of the negative mean log probability over every word and </s>.
  double perplexity(std::span<const Sentence> eval) const;

  // ARPA-style listing; see README for the layout.
  std::string to_arpa() const;

 private:
  using Id = std::uint32_t;
  using Key = std::vector<Id>;

  struct ContextStats {
    std::uint64_t total = 0;
    std::array<std::uint64_t, 3> n{};  // continuations with count 1, 2, 3+
  };

  Id id_of(std::string_view w) const;
  double prob_ids(Id word, const Key& history) const;  // history length = order used - 1
  double backoff_weight(int k, const Key& context) const;

  int order_ = 4;
  std::vector<std::string> words_;  // id -> word, includes <s>
  std::unordered_map<std::string, Id> ids_;
  std::vector<std::string> vocab_;
  Id unk_ = 0;
  Id bos_ = 0;
  // Indexed by n-gram length; index 0 unused.
  std::vector<std::map<Key, std::uint64_t>> counts_;
  std::vector<std::map<Key, ContextStats>> context_stats_;
  std::vector<Discounts> discounts_;
  PruningReport pruning_;
};

// Reads the listing written by NGramLM::to_arpa and answers queries by the
// usual backoff rule. Kept separate from NGramLM so the two can be checked
// against each other.
class ArpaModel {
 public:
  static ArpaModel parse(std::string_view text);
  int order() const { return order_; }
  double prob(std::string_view word, std::span<const std::string> context) const;
  double perplexity(std::span<const Sentence> eval) const;

 private:
  struct Entry {
    double log10_prob = 0;
    double log10_backoff = 0;
    bool has_prob = false;
  };
  double log10_prob(std::vector<std::string> ngram) const;

  int order_ = 0;
  std::map<std::vector<std::string>, Entry> entries_;
};

}  // namespace qaug::lm

#endif  // QAUG_LM_HPP_
