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

#include "qaug/pipeline.hpp"

#include <cinttypes>
#include <cstdio>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "qaug/random.hpp"
#include "qaug/text_io.hpp"

namespace qaug::pipeline {

using json = nlohmann::ordered_json;

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, v);
  return buf;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    T out;
    if constexpr (std::is_floating_point_v<T>) {
      out = static_cast<T>(std::stod(value, &used));
    } else {
      if (!value.empty() && value.front() == '-') throw std::invalid_argument("negative");
      out = static_cast<T>(std::stoull(value, &used));
    }
    if (used != value.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw InvalidArgument("config key '" + key + "': bad number '" + value + "'");
  }
}

fs::path resolve(const fs::path& base, const std::string& value) {
  if (value.empty()) return {};
  fs::path p(value);
  return p.is_absolute() ? p : (base / p).lexically_normal();
}

}  // namespace

PipelineConfig PipelineConfig::from_string(std::string_view text, const fs::path& base_dir,
                                           const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source, e.line(), e.message());
  }

  PipelineConfig c;
  auto visit = [&](const std::string& key, const std::string& raw) {
    const std::string value(trim(raw));
    if (key == "inputs.manifest") c.manifest = resolve(base_dir, value);
    else if (key == "inputs.suffix_rules") c.suffix_rules = resolve(base_dir, value);
    else if (key == "inputs.suffix_inventory") c.suffix_inventory = resolve(base_dir, value);
    else if (key == "inputs.lemma_lexicon") c.lemma_lexicon = resolve(base_dir, value);
    else if (key == "inputs.frame_lexicon") c.frame_lexicon = resolve(base_dir, value);
    else if (key == "inputs.bilingual_map") c.bilingual_map = resolve(base_dir, value);
    else if (key == "inputs.pivot_lexicon") c.pivot_lexicon = resolve(base_dir, value);
    else if (key == "inputs.role_lexicon") c.role_lexicon = resolve(base_dir, value);
    else if (key == "inputs.g2p_table") c.g2p_table = resolve(base_dir, value);
    else if (key == "generation.count") {
      if (value == "parity" || value.empty()) c.count.reset();
      else c.count = parse_number<std::size_t>(key, value);
    } else if (key == "generation.frames") c.frames_k = parse_number<std::size_t>(key, value);
    else if (key == "generation.markov_order") c.gen.markov_order = parse_number<std::size_t>(key, value);
    else if (key == "generation.max_len") c.gen.max_len = parse_number<std::size_t>(key, value);
    else if (key == "generation.diversity_floor") c.gen.diversity_floor = parse_number<double>(key, value);
    else if (key == "generation.attempts_per_output") c.gen.attempts_per_output = parse_number<std::size_t>(key, value);
    else if (key == "generation.adapter") c.generator_adapter = value;
    else if (key == "lm.order") c.lm.order = static_cast<int>(parse_number<std::size_t>(key, value));
    else if (key == "lm.kappa") c.lm.kappa = parse_number<double>(key, value);
    else if (key == "audio.speed_min") c.speed_min = parse_number<double>(key, value);
    else if (key == "audio.speed_max") c.speed_max = parse_number<double>(key, value);
    else if (key == "audio.word_gap_ms") c.tts.word_gap_ms = static_cast<int>(parse_number<std::size_t>(key, value));
    else if (key == "audio.unknown_ms") c.tts.unknown_ms = static_cast<int>(parse_number<std::size_t>(key, value));
    else if (key == "audio.peak") c.tts.peak = parse_number<double>(key, value);
    else if (key == "audio.tts_adapter") c.tts_adapter = value;
    else if (key == "audio.synthetic_speaker") c.synthetic_speaker = value;
    else if (key == "audio.synthetic_dialect") c.synthetic_dialect = value;
    else if (key == "run.seed") c.seed = parse_number<std::uint64_t>(key, value);
    else if (key == "run.out") c.out_dir = resolve(base_dir, value);
    else throw InvalidArgument(source + ": unknown config key '" + key + "'");
  };
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw InvalidArgument(source + ": config key '" + section + "' must sit inside a [section]");
    for (const auto& [key, leaf] : body) visit(section + "." + key, leaf.data());
  }
  return c;
}

PipelineConfig PipelineConfig::load(const fs::path& path) {
  return from_string(read_file(path), fs::absolute(path).parent_path(), path.string());
}

void PipelineConfig::validate() const {
  auto need = [](const fs::path& p, const char* what) {
    if (p.empty()) throw InvalidArgument(std::string("config: ") + what + " is not set");
    if (!fs::exists(p)) throw InvalidArgument(std::string("config: ") + what + " not found: " + p.string());
  };
  auto maybe = [](const fs::path& p, const char* what) {
    if (!p.empty() && !fs::exists(p))
      throw InvalidArgument(std::string("config: ") + what + " not found: " + p.string());
  };
  need(manifest, "inputs.manifest");
  need(suffix_rules, "inputs.suffix_rules");
  need(suffix_inventory, "inputs.suffix_inventory");
  need(lemma_lexicon, "inputs.lemma_lexicon");
  need(frame_lexicon, "inputs.frame_lexicon");
  need(g2p_table, "inputs.g2p_table");
  maybe(bilingual_map, "inputs.bilingual_map");
  maybe(pivot_lexicon, "inputs.pivot_lexicon");
  maybe(role_lexicon, "inputs.role_lexicon");
  if (bilingual_map.empty() != pivot_lexicon.empty())
    throw InvalidArgument("config: bilingual_map and pivot_lexicon go together");
  if (frames_k < 1) throw InvalidArgument("config: generation.frames must be >= 1");
  gen.validate();
  if (lm.order < 1) throw InvalidArgument("config: lm.order must be >= 1");
  if (!(lm.kappa >= 0 && lm.kappa <= 1)) throw InvalidArgument("config: lm.kappa must lie in [0,1]");
  if (!(speed_min >= 0.5 && speed_max <= 2.0 && speed_min <= speed_max))
    throw InvalidArgument("config: speed range must lie within [0.5, 2.0]");
  if (!(tts.peak > 0 && tts.peak <= 1.0)) throw InvalidArgument("config: audio.peak must lie in (0,1]");
}

std::string PipelineConfig::canonical() const {
  std::map<std::string, std::string> kv;
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  kv["inputs.manifest"] = manifest.string();
  kv["inputs.suffix_rules"] = suffix_rules.string();
  kv["inputs.suffix_inventory"] = suffix_inventory.string();
  kv["inputs.lemma_lexicon"] = lemma_lexicon.string();
  kv["inputs.frame_lexicon"] = frame_lexicon.string();
  kv["inputs.bilingual_map"] = bilingual_map.string();
  kv["inputs.pivot_lexicon"] = pivot_lexicon.string();
  kv["inputs.role_lexicon"] = role_lexicon.string();
  kv["inputs.g2p_table"] = g2p_table.string();
  kv["generation.count"] = count ? std::to_string(*count) : "parity";
  kv["generation.frames"] = std::to_string(frames_k);
  kv["generation.markov_order"] = std::to_string(gen.markov_order);
  kv["generation.max_len"] = std::to_string(gen.max_len);
  kv["generation.diversity_floor"] = num(gen.diversity_floor);
  kv["generation.attempts_per_output"] = std::to_string(gen.attempts_per_output);
  kv["generation.adapter"] = generator_adapter;
  kv["lm.order"] = std::to_string(lm.order);
  kv["lm.kappa"] = num(lm.kappa);
  kv["audio.speed_min"] = num(speed_min);
  kv["audio.speed_max"] = num(speed_max);
  kv["audio.word_gap_ms"] = std::to_string(tts.word_gap_ms);
  kv["audio.unknown_ms"] = std::to_string(tts.unknown_ms);
  kv["audio.peak"] = num(tts.peak);
  kv["audio.tts_adapter"] = tts_adapter;
  kv["audio.synthetic_speaker"] = synthetic_speaker;
  kv["audio.synthetic_dialect"] = synthetic_dialect;
  kv["run.seed"] = std::to_string(seed);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t PipelineConfig::hash() const {
  // Output location is left out so relocating a run does not change it.
  std::string material = canonical();
  for (const auto* p : {&manifest, &suffix_rules, &suffix_inventory, &lemma_lexicon, &frame_lexicon,
                        &bilingual_map, &pivot_lexicon, &role_lexicon, &g2p_table}) {
    if (!p->empty() && fs::exists(*p)) material += "\n--\n" + read_file(*p);
  }
  return hash_string(material);
}

std::string PipelineConfig::hash_hex() const { return hex64(hash()); }

Resources Resources::load(const PipelineConfig& cfg) {
  Resources r;
  r.analyzer = morph::Analyzer::load(cfg.suffix_rules, cfg.suffix_inventory, cfg.lemma_lexicon);
  r.frames = delex::load_lemma_map(cfg.frame_lexicon);
  if (!cfg.bilingual_map.empty()) {
    r.bridge = delex::load_lemma_map(cfg.bilingual_map);
    r.pivot = delex::load_lemma_map(cfg.pivot_lexicon);
  }
  if (!cfg.role_lexicon.empty()) r.roles = delex::RoleAssigner(delex::load_lemma_map(cfg.role_lexicon));
  r.g2p = audio::G2PTable::load(cfg.g2p_table);
  return r;
}

std::optional<std::string> Resources::frame_of(const morph::MorphToken& t) const {
  return delex::lookup_frame(t.lemma, frames, bridge, pivot);
}

std::vector<delex::DelexSentence> DelexCorpus::sentences() const {
  std::vector<delex::DelexSentence> out;
  out.reserve(results.size());
  for (const auto& r : results) out.push_back(r.sentence);
  return out;
}

DelexCorpus delexicalize_corpus(const std::vector<std::pair<std::string, std::string>>& texts,
                                const Resources& res, std::size_t k) {
  DelexCorpus dc;
  for (const auto& [id, text] : texts) {
    auto tokens = res.analyzer.analyze(text);
    delex::TaggedSentence tags;
    for (const auto& t : tokens) tags.push_back(res.frame_of(t));
    dc.analyzed.push_back(std::move(tokens));
    dc.tagged.push_back(std::move(tags));
  }
  dc.selected_frames = delex::select_frames(dc.tagged, k);
  const std::set<std::string> selected(dc.selected_frames.begin(), dc.selected_frames.end());
  for (std::size_t i = 0; i < texts.size(); ++i)
    dc.results.push_back(delex::delexicalize(dc.analyzed[i], dc.tagged[i], selected, res.roles, texts[i].first));
  dc.vocab = delex::build_slot_vocab(dc.results);
  return dc;
}

std::string render_tagging(const DelexCorpus& dc) {
  std::string out;
  for (std::size_t s = 0; s < dc.results.size(); ++s) {
    const auto& items = dc.results[s].sentence.items;
    for (std::size_t i = 0; i < items.size(); ++i) {
      out += dc.analyzed[s][i].surface + "\t";
      if (const auto* slot = std::get_if<delex::SlotLabel>(&items[i])) {
        out += slot->role + " " + slot->frame;
      } else {
        out += "0";
      }
      out += "\n";
    }
    out += "\n";
  }
  return out;
}

std::vector<lm::Sentence> normalized_sentences(const corpus::Manifest& m, corpus::Split split,
                                               const morph::Analyzer& analyzer) {
  std::vector<lm::Sentence> out;
  for (const auto& r : m.records) {
    if (r.split != split) continue;
    auto toks = analyzer.normalize(r.text);
    if (!toks.empty()) out.push_back(std::move(toks));
  }
  return out;
}

corpus::Manifest resolve_audio_paths(const corpus::Manifest& m, const fs::path& manifest_dir) {
  auto out = m;
  for (auto& r : out.records) r.audio_path = resolve(manifest_dir, r.audio_path).string();
  return out;
}

corpus::Manifest relativize_audio_paths(const corpus::Manifest& m, const fs::path& dir) {
  auto out = m;
  const auto base = fs::weakly_canonical(fs::absolute(dir));
  for (auto& r : out.records) {
    fs::path p(r.audio_path);
    if (p.is_absolute()) r.audio_path = fs::weakly_canonical(p).lexically_proximate(base).generic_string();
  }
  return out;
}

std::string format_hours(std::int64_t ms) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", static_cast<double>(ms) / 3.6e6);
  return buf;
}

void write_run_metadata(const fs::path& path, const std::string& stage, const PipelineConfig* cfg,
                        std::uint64_t seed, const json& details) {
  json meta;
  meta["stage"] = stage;
  meta["seed"] = seed;
  if (cfg) {
    meta["config_hash"] = cfg->hash_hex();
    meta["config"] = split(cfg->canonical(), '\n');
    meta["config"].erase(meta["config"].size() - 1);
  }
  meta["details"] = details;
  write_file(path, meta.dump(2) + "\n");
}

namespace {

// Tracks completed stages in <out>/pipeline.state so a failed run shows where
// it stopped; outputs of completed stages are left in place.
class StageLog {
 public:
  StageLog(fs::path path, std::string config_hash) : path_(std::move(path)), hash_(std::move(config_hash)) {
    flush(std::nullopt);
  }

  template <typename Fn>
  auto run(const std::string& stage, Fn&& fn) {
    try {
      if constexpr (std::is_void_v<decltype(fn())>) {
        fn();
        done(stage);
      } else {
        auto r = fn();
        done(stage);
        return r;
      }
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      flush(stage);
      throw StageError(stage, e.what());
    }
  }

 private:
  void done(const std::string& stage) {
    completed_.push_back(stage);
    flush(std::nullopt);
  }
  void flush(const std::optional<std::string>& failed) {
    json st;
    st["config_hash"] = hash_;
    st["completed"] = completed_;
    st["failed"] = failed ? json(*failed) : json(nullptr);
    write_file(path_, st.dump(2) + "\n");
  }

  fs::path path_;
  std::string hash_;
  std::vector<std::string> completed_;
};

std::string seq_id(const char* prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s%06zu", prefix, i);
  return buf;
}

json discounts_json(const lm::NGramLM& model) {
  json out = json::array();
  for (int k = 1; k <= model.order(); ++k) {
    const auto& d = model.discounts(k);
    out.push_back({{"order", k}, {"d1", d.d1}, {"d2", d.d2}, {"d3+", d.d3}, {"fallback", d.fallback}});
  }
  return out;
}

json lm_json(const lm::NGramLM& model) {
  json j;
  j["order"] = model.order();
  j["vocab_size"] = model.vocab().size();
  j["hapax_total"] = model.pruning().hapax_total;
  j["replaced"] = model.pruning().replaced;
  j["kappa"] = model.pruning().kappa;
  j["discounts"] = discounts_json(model);
  return j;
}

std::string lines_of(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

// Synthesizes one utterance, pseudo-TTS or through the adapter.
struct Synthesizer {
  const PipelineConfig& cfg;
  const Resources& res;
  std::optional<ExternalProcessClient> adapter;

  Synthesizer(const PipelineConfig& c, const Resources& r) : cfg(c), res(r) {
    if (!cfg.tts_adapter.empty())
      adapter.emplace(ExternalProcessClient::split_command_line(cfg.tts_adapter));
  }

  audio::AudioBuffer operator()(const std::string& id, const std::string& text, const fs::path& wav) {
    if (adapter) return audio::external_tts(*adapter, text, wav);
    auto res_tts = audio::pseudo_tts(text, res.g2p, derive_seed(cfg.seed, id), cfg.tts);
    audio::write_wav(res_tts.audio, wav);
    return res_tts.audio;
  }
};

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const fs::path out = cfg.out_dir;
  fs::create_directories(out);
  const auto hash = cfg.hash_hex();
  StageLog log(out / "pipeline.state", hash);
  PipelineResult result;

  auto [natural, res] = log.run("load", [&] {
    auto m = resolve_audio_paths(corpus::load_manifest(cfg.manifest), fs::absolute(cfg.manifest).parent_path());
    return std::make_pair(std::move(m), Resources::load(cfg));
  });

  std::vector<std::pair<std::string, std::string>> train_texts;
  log.run("normalize", [&] {
    std::string text;
    for (const auto& r : natural.records) {
      if (r.split != corpus::Split::kTrain) continue;
      train_texts.emplace_back(r.id, r.text);
      text += join(res.analyzer.normalize(r.text), " ") + "\n";
    }
    write_file(out / "normalized.txt", text);
  });
  result.natural_train_records = train_texts.size();

  auto dc = log.run("delex", [&] {
    auto d = delexicalize_corpus(train_texts, res, cfg.frames_k);
    std::string text;
    for (const auto& r : d.results) text += r.sentence.render() + "\n";
    write_file(out / "delex.txt", text);
    write_file(out / "slot_vocab.tsv", d.vocab.to_tsv());
    write_file(out / "frames.txt", lines_of(d.selected_frames));
    write_file(out / "tagging.tsv", render_tagging(d));
    return d;
  });

  const std::size_t requested = cfg.count.value_or(train_texts.size());
  result.requested = requested;
  auto templates = log.run("generate", [&] {
    std::vector<delex::DelexSentence> t;
    auto corpus_sents = dc.sentences();
    if (requested > 0 && corpus_sents.empty()) throw InvalidArgument("no natural train sentences to learn from");
    if (!cfg.generator_adapter.empty()) {
      ExternalProcessClient client(ExternalProcessClient::split_command_line(cfg.generator_adapter));
      auto gen = textgen::external_generate(client, corpus_sents, requested);
      client.finish();
      for (const auto& rej : gen.rejects)
        result.report["generator_rejects"].push_back({{"line", rej.line}, {"reason", rej.reason}});
      auto ranked = textgen::rank_candidates(gen.templates, corpus_sents, cfg.gen.diversity_floor);
      for (auto& r : ranked) t.push_back(std::move(r.sentence));
    } else if (requested > 0) {
      auto gcfg = cfg.gen;
      gcfg.count = requested;
      gcfg.seed = derive_seed(cfg.seed, "generate");
      t = textgen::generate_templates(corpus_sents, gcfg);
    }
    std::string text;
    for (const auto& s : t) text += s.render() + "\n";
    write_file(out / "templates.txt", text);
    return t;
  });

  log.run("realize", [&] {
    for (std::size_t i = 0; i < templates.size(); ++i)
      result.synthetic_text.push_back(
          textgen::realize(templates[i], dc.vocab, derive_seed(cfg.seed, "realize:" + std::to_string(i))));
    write_file(out / "synthetic_text.txt", lines_of(result.synthetic_text));
  });

  corpus::Manifest synthetic;
  std::vector<std::string> dropped;
  log.run("tts", [&] {
    Synthesizer synth(cfg, res);
    std::size_t seq = 0;
    for (const auto& text : result.synthetic_text) {
      const auto id = seq_id("syn-", ++seq);
      const auto wav = out / "synth" / (id + ".wav");
      fs::create_directories(wav.parent_path());
      auto buf = synth(id, text, wav);
      corpus::UtteranceRecord r;
      r.id = id;
      r.audio_path = fs::absolute(wav).string();
      r.duration_ms = static_cast<std::int64_t>(buf.samples.size()) * 1000 / audio::kCanonicalRate;
      r.text = text;
      r.speaker = cfg.synthetic_speaker;
      r.dialect = cfg.synthetic_dialect;
      r.split = corpus::Split::kTrain;
      r.origin = corpus::Origin::kSynthetic;
      if (r.duration_ms > corpus::kMaxSegmentMs) {
        dropped.push_back(id);
        fs::remove(wav);
        continue;
      }
      synthetic.records.push_back(std::move(r));
    }
    if (synth.adapter) synth.adapter->finish();
  });

  log.run("merge", [&] {
    corpus::Manifest merged = natural;
    std::set<std::string> ids;
    for (const auto& r : merged.records) ids.insert(r.id);
    for (const auto& r : synthetic.records) {
      if (!ids.insert(r.id).second) throw corpus::DuplicateId(r.id);
      merged.records.push_back(r);
    }
    merged.source_note = "natural + synthetic";
    result.merged = relativize_audio_paths(merged, out);
    corpus::save_manifest(result.merged, out / "manifest.merged.jsonl");
  });

  log.run("lm", [&] {
    auto sents = normalized_sentences(natural, corpus::Split::kTrain, res.analyzer);
    for (const auto& line : result.synthetic_text) {
      auto toks = split_whitespace(line);
      if (!toks.empty()) sents.push_back(std::move(toks));
    }
    auto lcfg = cfg.lm;
    lcfg.seed = derive_seed(cfg.seed, "lm");
    result.new_lm = lm::NGramLM::train(sents, lcfg);
    write_file(out / "lm.arpa", "# config_hash " + hash + " seed " + std::to_string(cfg.seed) + "\n" +
                                    result.new_lm.to_arpa());
  });

  json& rep = result.report;
  rep["config_hash"] = hash;
  rep["seed"] = cfg.seed;
  rep["natural_train_records"] = result.natural_train_records;
  rep["natural_train_hours"] = natural.split_ms(corpus::Split::kTrain) / 3.6e6;
  rep["selected_frames"] = dc.selected_frames;
  rep["requested_synthetic"] = requested;
  rep["generated_templates"] = templates.size();
  rep["synthetic_records"] = synthetic.records.size();
  rep["synthetic_hours"] = synthetic.total_ms() / 3.6e6;
  rep["dropped_over_30s"] = dropped;
  rep["merged_records"] = result.merged.records.size();
  rep["lm"] = lm_json(result.new_lm);
  write_file(out / "report.json", rep.dump(2) + "\n");

  json artifacts = json::array();
  for (const char* name : {"normalized.txt", "delex.txt", "slot_vocab.tsv", "frames.txt", "tagging.tsv",
                           "templates.txt", "synthetic_text.txt", "manifest.merged.jsonl", "lm.arpa", "report.json"})
    artifacts.push_back(name);
  artifacts.push_back("synth/*.wav");
  write_run_metadata(out / "run.json", "pipeline", &cfg, cfg.seed, {{"artifacts", artifacts}});
  return result;
}

eval::CorpusScore score_hypotheses(const corpus::Manifest& refs, const fs::path& hyp_jsonl,
                                   const morph::Analyzer* morph_tokens) {
  std::map<std::string, const corpus::UtteranceRecord*> by_id;
  for (const auto& r : refs.records) by_id[r.id] = &r;
  std::vector<eval::TokenPair> pairs;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(hyp_jsonl)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(hyp_jsonl.string(), line_no, e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text"))
      throw ParseError(hyp_jsonl.string(), line_no, "expected {\"id\": ..., \"text\": ...}");
    const auto id = j["id"].get<std::string>();
    auto it = by_id.find(id);
    if (it == by_id.end()) throw ParseError(hyp_jsonl.string(), line_no, "unknown id '" + id + "'");
    const auto hyp = j["text"].get<std::string>();
    if (morph_tokens) {
      pairs.emplace_back(morph_tokens->morphemes(it->second->text), morph_tokens->morphemes(hyp));
    } else {
      pairs.emplace_back(morph::tokenize(it->second->text), morph::tokenize(hyp));
    }
  }
  return eval::corpus_score(pairs);
}

ExperimentResult run_experiment(const PipelineConfig& cfg, const HypothesisFiles& hyps) {
  for (const auto& [name, _] : hyps) {
    const auto& names = variant_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
      throw InvalidArgument("unknown experiment variant '" + name + "'");
  }
  auto pcfg = cfg;
  pcfg.out_dir = cfg.out_dir / "pipeline";
  auto pipe = run_pipeline(pcfg);

  const fs::path out = cfg.out_dir / "experiment";
  fs::create_directories(out);
  StageLog log(out / "experiment.state", cfg.hash_hex());

  auto natural = resolve_audio_paths(corpus::load_manifest(cfg.manifest), fs::absolute(cfg.manifest).parent_path());
  auto res = Resources::load(cfg);
  const auto natural_train_ms = natural.split_ms(corpus::Split::kTrain);

  auto old_lm_text = log.run("old_lm", [&] {
    auto sents = normalized_sentences(natural, corpus::Split::kTrain, res.analyzer);
    auto lcfg = cfg.lm;
    lcfg.seed = derive_seed(cfg.seed, "lm");
    return "# config_hash " + cfg.hash_hex() + " seed " + std::to_string(cfg.seed) + "\n" +
           lm::NGramLM::train(sents, lcfg).to_arpa();
  });
  const auto new_lm_text = read_file(pcfg.out_dir / "lm.arpa");

  ExperimentResult result;
  auto emit = [&](VariantSummary v, const corpus::Manifest& m) {
    const auto dir = out / v.name;
    fs::create_directories(dir);
    v.manifest = dir / "manifest.jsonl";
    v.lm = dir / "lm.arpa";
    corpus::save_manifest(relativize_audio_paths(m, dir), v.manifest);
    write_file(v.lm, v.lm_name == "new" ? new_lm_text : old_lm_text);
    v.added_train_ms = m.split_ms(corpus::Split::kTrain) - v.natural_train_ms;
    result.variants.push_back(std::move(v));
  };
  auto base = [&](const char* name, const char* label, const char* data, const char* lm_name) {
    VariantSummary v;
    v.name = name;
    v.label = label;
    v.training_data = data;
    v.lm_name = lm_name;
    v.natural_train_ms = natural_train_ms;
    return v;
  };

  log.run("exp1_natural", [&] {
    emit(base("exp1_natural", "Exp 1", "natural (Baseline)", "old"), natural);
  });

  log.run("exp2_distorted", [&] {
    auto m = natural;
    const auto dir = out / "audio" / "distorted";
    fs::create_directories(dir);
    for (const auto& r : natural.records) {
      if (r.split != corpus::Split::kTrain) continue;
      const double f = audio::sample_speed_factor(cfg.seed, r.id, cfg.speed_min, cfg.speed_max);
      auto buf = audio::speed_perturb(audio::read_wav_strict(r.audio_path), f);
      auto d = r;
      d.id = "dist-" + r.id;
      d.audio_path = fs::absolute(dir / (d.id + ".wav")).string();
      d.origin = corpus::Origin::kDistorted;
      d.duration_ms = static_cast<std::int64_t>(buf.samples.size()) * 1000 / audio::kCanonicalRate;
      d.extra["speed_factor"] = f;
      audio::write_wav(buf, d.audio_path);
      m.records.push_back(std::move(d));
    }
    emit(base("exp2_distorted", "Exp 2", "natural + distorted audio", "old"), m);
  });

  log.run("exp3_synthetic", [&] {
    auto merged = resolve_audio_paths(pipe.merged, pcfg.out_dir);
    emit(base("exp3_synthetic", "Exp 3", "natural + synthetic audio and synthetic text aligned + new LM", "new"),
         merged);
  });

  log.run("exp4_doubled", [&] {
    auto m = natural;
    for (const auto& r : natural.records) {
      if (r.split != corpus::Split::kTrain) continue;
      auto d = r;
      d.id = "dup-" + r.id;
      m.records.push_back(std::move(d));
    }
    emit(base("exp4_doubled", "Exp 4", "natural + natural", "old"), m);
  });

  log.run("ablation_no_tts", [&] {
    emit(base("ablation_no_tts", "Without TTS model", "Natural", "new"), natural);
  });

  log.run("ablation_no_seq2seq", [&] {
    auto m = natural;
    Synthesizer synth(cfg, res);
    const auto dir = out / "audio" / "tts_natural";
    fs::create_directories(dir);
    std::size_t seq = 0;
    for (const auto& r : natural.records) {
      if (r.split != corpus::Split::kTrain) continue;
      const auto id = seq_id("syn-nat-", ++seq);
      const auto wav = dir / (id + ".wav");
      auto buf = synth(id, r.text, wav);
      corpus::UtteranceRecord s;
      s.id = id;
      s.audio_path = fs::absolute(wav).string();
      s.duration_ms = static_cast<std::int64_t>(buf.samples.size()) * 1000 / audio::kCanonicalRate;
      s.text = r.text;
      s.speaker = cfg.synthetic_speaker;
      s.dialect = cfg.synthetic_dialect;
      s.origin = corpus::Origin::kSynthetic;
      if (s.duration_ms > corpus::kMaxSegmentMs) {
        fs::remove(wav);
        continue;
      }
      m.records.push_back(std::move(s));
    }
    if (synth.adapter) synth.adapter->finish();
    emit(base("ablation_no_seq2seq", "Without Seq2seq model", "natural + synthetic audio", "old"), m);
  });

  log.run("score", [&] {
    for (auto& v : result.variants) {
      auto it = hyps.find(v.name);
      if (it == hyps.end()) continue;
      v.wer = score_hypotheses(natural, it->second, nullptr).rate();
      v.ter = score_hypotheses(natural, it->second, &res.analyzer).rate();
    }
  });

  auto hours = [](const VariantSummary& v) {
    return v.added_train_ms ? format_hours(v.natural_train_ms) + " + " + format_hours(v.added_train_ms)
                            : format_hours(v.natural_train_ms);
  };
  const bool scored = !hyps.empty();
  result.table4.with_ter = scored;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& v = result.variants[i];
    result.table4.rows.push_back({v.label, v.training_data, "", hours(v), v.wer, v.ter});
  }
  result.table5.first_column = "Method";
  result.table5.with_lm = true;
  result.table5.with_ter = scored;
  {
    const auto& full = result.variants[2];
    result.table5.rows.push_back({"Our data augmentation method", "natural + synthetic audio and synthetic text aligned",
                                  "New LM", hours(full), full.wer, full.ter});
    for (std::size_t i = 4; i < 6; ++i) {
      const auto& v = result.variants[i];
      result.table5.rows.push_back({v.label, v.training_data, v.lm_name == "new" ? "New LM" : "Old LM", hours(v),
                                    v.wer, v.ter});
    }
  }
  write_file(out / "table4.tsv", result.table4.to_tsv());
  write_file(out / "table4.txt", result.table4.to_text());
  write_file(out / "table5.tsv", result.table5.to_tsv());
  write_file(out / "table5.txt", result.table5.to_text());

  json summary = json::array();
  for (const auto& v : result.variants) {
    json j;
    j["name"] = v.name;
    j["label"] = v.label;
    j["training_data"] = v.training_data;
    j["lm"] = v.lm_name;
    j["natural_train_ms"] = v.natural_train_ms;
    j["added_train_ms"] = v.added_train_ms;
    j["train_hours"] = v.train_ms() / 3.6e6;
    j["manifest"] = fs::relative(v.manifest, out).generic_string();
    j["wer"] = v.wer ? json(*v.wer) : json(nullptr);
    j["ter"] = v.ter ? json(*v.ter) : json(nullptr);
    summary.push_back(std::move(j));
  }
  write_run_metadata(out / "experiment.json", "experiment", &cfg, cfg.seed, {{"variants", summary}});
  return result;
}

}  // namespace qaug::pipeline
