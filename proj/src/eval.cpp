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

#include "qaug/eval.hpp"

#include <algorithm>
#include <cstdio>

namespace qaug::eval {

EditAlignment align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      at(i, j) = std::min({at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1), at(i - 1, j) + 1,
                           at(i, j - 1) + 1});

  EditAlignment a;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::size_t here = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && at(i - 1, j - 1) == here) {
      a.ops.push_back(Op::kHit);
      ++a.hits;
      --i, --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && at(i - 1, j - 1) + 1 == here) {
      a.ops.push_back(Op::kSubstitution);
      ++a.substitutions;
      --i, --j;
    } else if (i > 0 && at(i - 1, j) + 1 == here) {
      a.ops.push_back(Op::kDeletion);
      ++a.deletions;
      --i;
    } else {
      a.ops.push_back(Op::kInsertion);
      ++a.insertions;
      --j;
    }
  }
  std::reverse(a.ops.begin(), a.ops.end());
  return a;
}

double wer(std::span<const std::string> ref, std::span<const std::string> hyp) {
  if (ref.empty()) throw EmptyReference();
  return 100.0 * static_cast<double>(align(ref, hyp).errors()) / static_cast<double>(ref.size());
}

double ter(std::string_view ref, std::string_view hyp, const morph::Analyzer& analyzer) {
  auto r = analyzer.morphemes(ref);
  auto h = analyzer.morphemes(hyp);
  return wer(r, h);
}

CorpusScore corpus_score(std::span<const TokenPair> pairs) {
  CorpusScore s;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto& [ref, hyp] = pairs[i];
    if (ref.empty()) throw EmptyReference(i);
    auto a = align(ref, hyp);
    s.errors += a.errors();
    s.substitutions += a.substitutions;
    s.deletions += a.deletions;
    s.insertions += a.insertions;
    s.ref_tokens += ref.size();
    ++s.utterances;
  }
  return s;
}

std::string format_percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

namespace {

std::vector<std::vector<std::string>> cells(const ScoreReport& r) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> header{r.first_column, "Training data"};
  if (r.with_lm) header.emplace_back("LM");
  header.insert(header.end(), {"Training hours", "WER (%)"});
  if (r.with_ter) header.emplace_back("TER (%)");
  out.push_back(header);
  for (const auto& row : r.rows) {
    std::vector<std::string> c{row.experiment, row.training_data};
    if (r.with_lm) c.push_back(row.lm);
    c.push_back(row.training_hours);
    c.push_back(row.wer ? format_percent(*row.wer) : "pending");
    if (r.with_ter) c.push_back(row.ter ? format_percent(*row.ter) : "pending");
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace

std::string ScoreReport::to_tsv() const {
  std::string out;
  for (const auto& row : cells(*this)) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += '\t';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

std::string ScoreReport::to_text() const {
  auto table = cells(*this);
  std::vector<std::size_t> width(table.front().size(), 0);
  for (const auto& row : table)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::string out;
  for (const auto& row : table) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) line += std::string(width[i] - row[i].size() + 2, ' ');
    }
    out += line + "\n";
  }
  return out;
}

}  // namespace qaug::eval
