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

#ifndef QAUG_EVAL_HPP_
#define QAUG_EVAL_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "qaug/error.hpp"
#include "qaug/morph.hpp"

namespace qaug::eval {

enum class Op { kHit, kSubstitution, kDeletion, kInsertion };

struct EditAlignment {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t hits = 0;
  std::vector<Op> ops;

  std::size_t errors() const { return substitutions + deletions + insertions; }
};

class EmptyReference : public Error {
 public:
  EmptyReference() : Error("reference is empty") {}
  explicit EmptyReference(std::size_t index)
      : Error("reference " + std::to_string(index) + " is empty"), index_(index) {}
  std::optional<std::size_t> index() const { return index_; }

 private:
  std::optional<std::size_t> index_;
};

// Minimum unit-cost Levenshtein alignment. On the backtrace, ties prefer
// hit, then substitution, deletion, insertion.
EditAlignment align(std::span<const std::string> ref, std::span<const std::string> hyp);

// 100 * (S + D + I) / |ref|.
double wer(std::span<const std::string> ref, std::span<const std::string> hyp);

// Word error rate over morpheme tokens (lemma and suffixes as separate units).
double ter(std::string_view ref, std::string_view hyp, const morph::Analyzer& analyzer);

struct CorpusScore {
  std::size_t errors = 0;
  std::size_t ref_tokens = 0;
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t utterances = 0;

  double rate() const {
    return ref_tokens ? 100.0 * static_cast<double>(errors) / static_cast<double>(ref_tokens) : 0.0;
  }
};

using TokenPair = std::pair<std::vector<std::string>, std::vector<std::string>>;

// Pooled counts: 100 * sum(errors) / sum(|ref|).
CorpusScore corpus_score(std::span<const TokenPair> pairs);

struct ScoreRow {
  std::string experiment;
  std::string training_data;
  std::string lm;  // shown only when the report has an LM column
  std::string training_hours;
  std::optional<double> wer;  // nullopt renders "pending"
  std::optional<double> ter;
};

struct ScoreReport {
  std::vector<ScoreRow> rows;
  bool with_lm = false;
  bool with_ter = false;
  std::string first_column = "Experiment";

  std::string to_tsv() const;
  std::string to_text() const;  // columns padded to align
};

std::string format_percent(double v);

}  // namespace qaug::eval

#endif  // QAUG_EVAL_HPP_
