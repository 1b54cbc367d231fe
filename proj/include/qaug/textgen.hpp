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

#ifndef QAUG_TEXTGEN_HPP_
#define QAUG_TEXTGEN_HPP_

#include <cstddef>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "qaug/delex.hpp"
#include "qaug/error.hpp"
#include "qaug/process.hpp"

namespace qaug::textgen {

struct GenerationConfig {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  std::size_t max_len = 40;
  double diversity_floor = 0.1;
  std::size_t markov_order = 1;
  // Sampling gives up after count * attempts_per_output draws.
  std::size_t attempts_per_output = 100;

  void validate() const;
};

struct RankedCandidate {
  delex::DelexSentence sentence;
  std::string origin_id;  // nearest original
  double dissimilarity = 0;
};

class EmptySentence : public InvalidArgument {
 public:
  EmptySentence() : InvalidArgument("diversity_score: empty sentence") {}
};

class CorpusEmpty : public InvalidArgument {
 public:
  CorpusEmpty() : InvalidArgument("generate_templates: delexicalized corpus is empty") {}
};

class EmptyFrameVocab : public Error {
 public:
  explicit EmptyFrameVocab(std::string frame)
      : Error("slot vocabulary for frame '" + frame + "' is empty"), frame_(std::move(frame)) {}
  const std::string& frame() const { return frame_; }

 private:
  std::string frame_;
};

// 1 - Jaccard similarity of the sets of adjacent rendered-item pairs. Two
// one-item sentences have no pairs; they score 0 when equal and 1 otherwise.
double diversity_score(const delex::DelexSentence& candidate, const delex::DelexSentence& original);

// Each candidate is scored against its nearest original (minimum score).
// Candidates scoring below floor are dropped; the rest are sorted by score
// descending, then rendered template ascending.
std::vector<RankedCandidate> rank_candidates(std::span<const delex::DelexSentence> candidates,
                                             std::span<const delex::DelexSentence> originals,
                                             double floor);

// Built-in generator: an order-k Markov chain over rendered template items,
// sampled with per-draw derived seeds. Draws that fall below the diversity
// floor are discarded; accepted templates come back in rank order.
std::vector<delex::DelexSentence> generate_templates(std::span<const delex::DelexSentence> corpus,
                                                     const GenerationConfig& cfg);

// Fills every slot with a word drawn uniformly from its frame vocabulary.
std::vector<std::string> realize_tokens(const delex::DelexSentence& tmpl,
                                        const delex::SlotVocabulary& vocab, std::uint64_t seed);
std::string realize(const delex::DelexSentence& tmpl, const delex::SlotVocabulary& vocab,
                    std::uint64_t seed);

struct RejectedLine {
  std::size_t line;  // 1-based response line
  std::string reason;
};

struct ExternalGeneration {
  std::vector<delex::DelexSentence> templates;
  std::vector<RejectedLine> rejects;
};

// Runs one generate request against an adapter. Structural violations throw
// ProtocolError; templates that parse but use an unknown frame (or a bad slot)
// are listed in rejects.
ExternalGeneration external_generate(ExternalProcessClient& client,
                                     std::span<const delex::DelexSentence> corpus,
                                     std::size_t count);

std::set<std::string> frames_of(std::span<const delex::DelexSentence> corpus);

}  // namespace qaug::textgen

#endif  // QAUG_TEXTGEN_HPP_
