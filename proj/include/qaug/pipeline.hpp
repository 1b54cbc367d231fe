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

#ifndef QAUG_PIPELINE_HPP_
#define QAUG_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qaug/audio.hpp"
#include "qaug/corpus.hpp"
#include "qaug/delex.hpp"
#include "qaug/error.hpp"
#include "qaug/eval.hpp"
#include "qaug/lm.hpp"
#include "qaug/morph.hpp"
#include "qaug/textgen.hpp"

namespace qaug::pipeline {

namespace fs = std::filesystem;

// Failure inside one named stage; the CLI prints the stage and exits nonzero.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& cause)
      : Error("stage '" + stage + "' failed: " + cause), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

// INI-style key/value document. Relative paths resolve against the config
// file's directory. See README for the key list.
struct PipelineConfig {
  fs::path manifest;
  fs::path suffix_rules;
  fs::path suffix_inventory;
  fs::path lemma_lexicon;
  fs::path frame_lexicon;
  fs::path bilingual_map;   // optional
  fs::path pivot_lexicon;   // optional
  fs::path role_lexicon;    // optional
  fs::path g2p_table;

  std::optional<std::size_t> count;  // unset: one synthetic sentence per natural train record
  std::size_t frames_k = 3;
  textgen::GenerationConfig gen;
  lm::TrainConfig lm;
  double speed_min = audio::kSpeedMin;
  double speed_max = audio::kSpeedMax;
  audio::TtsConfig tts;
  std::string synthetic_speaker = "pseudo-tts";
  std::string synthetic_dialect;

  std::uint64_t seed = 1;
  fs::path out_dir = "out";
  std::string generator_adapter;  // command line; empty uses the built-in generator
  std::string tts_adapter;        // command line; empty uses pseudo-TTS

  static PipelineConfig load(const fs::path& path);
  static PipelineConfig from_string(std::string_view text, const fs::path& base_dir,
                                    const std::string& source = "<config>");

  // Checks that referenced files exist and values are in range.
  void validate() const;
  // Sorted key=value rendering of every effective setting.
  std::string canonical() const;
  // FNV-1a over canonical() and the bytes of every referenced input file.
  std::uint64_t hash() const;
  std::string hash_hex() const;
};

// Tables loaded once per run.
struct Resources {
  morph::Analyzer analyzer;
  delex::FrameLexicon frames;
  delex::BilingualMap bridge;
  delex::FrameLexicon pivot;
  delex::RoleAssigner roles;
  audio::G2PTable g2p;

  static Resources load(const PipelineConfig& cfg);
  std::optional<std::string> frame_of(const morph::MorphToken& t) const;
};

struct DelexCorpus {
  std::vector<delex::DelexResult> results;
  std::vector<std::string> selected_frames;
  delex::SlotVocabulary vocab;
  std::vector<std::vector<morph::MorphToken>> analyzed;
  std::vector<delex::TaggedSentence> tagged;

  std::vector<delex::DelexSentence> sentences() const;
};

// Normalize, segment, tag, pick the k most frequent frames and delexicalize
// each (id, text) pair.
DelexCorpus delexicalize_corpus(const std::vector<std::pair<std::string, std::string>>& texts,
                                const Resources& res, std::size_t k);

// "word<TAB>role frame" or "word<TAB>0" per token, blank line between
// sentences.
std::string render_tagging(const DelexCorpus& dc);

std::vector<lm::Sentence> normalized_sentences(const corpus::Manifest& m, corpus::Split split,
                                               const morph::Analyzer& analyzer);

// Audio paths in the returned manifest are absolute.
corpus::Manifest resolve_audio_paths(const corpus::Manifest& m, const fs::path& manifest_dir);
// Rewrites absolute audio paths relative to dir.
corpus::Manifest relativize_audio_paths(const corpus::Manifest& m, const fs::path& dir);

struct PipelineResult {
  corpus::Manifest merged;
  std::vector<std::string> synthetic_text;
  std::size_t natural_train_records = 0;
  std::size_t requested = 0;
  lm::NGramLM new_lm;
  nlohmann::ordered_json report;
};

// normalize -> delex -> generate -> rank -> realize -> TTS -> merge -> LM.
// Writes every artifact under cfg.out_dir.
PipelineResult run_pipeline(const PipelineConfig& cfg);

struct VariantSummary {
  std::string name;
  std::string label;
  std::string training_data;
  std::string lm_name;  // "old" or "new"
  std::int64_t natural_train_ms = 0;
  std::int64_t added_train_ms = 0;
  fs::path manifest;
  fs::path lm;
  std::optional<double> wer;
  std::optional<double> ter;

  std::int64_t train_ms() const { return natural_train_ms + added_train_ms; }
};

struct ExperimentResult {
  std::vector<VariantSummary> variants;  // exp1..exp4, then the two ablations
  eval::ScoreReport table4;
  eval::ScoreReport table5;
};

// variant name -> hypothesis JSONL ({"id": ..., "text": ...} per line).
using HypothesisFiles = std::map<std::string, fs::path>;

inline const std::vector<std::string>& variant_names() {
  static const std::vector<std::string> kNames{"exp1_natural",      "exp2_distorted",
                                               "exp3_synthetic",    "exp4_doubled",
                                               "ablation_no_tts",   "ablation_no_seq2seq"};
  return kNames;
}

ExperimentResult run_experiment(const PipelineConfig& cfg, const HypothesisFiles& hyps = {});

// Scores a hypothesis JSONL against manifest transcripts by id.
eval::CorpusScore score_hypotheses(const corpus::Manifest& refs, const fs::path& hyp_jsonl,
                                   const morph::Analyzer* morph_tokens);

std::string format_hours(std::int64_t ms);

// Run metadata sidecar written next to stage outputs.
void write_run_metadata(const fs::path& path, const std::string& stage, const PipelineConfig* cfg,
                        std::uint64_t seed, const nlohmann::ordered_json& details);

}  // namespace qaug::pipeline

#endif  // QAUG_PIPELINE_HPP_
