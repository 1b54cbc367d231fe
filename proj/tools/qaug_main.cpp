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

// qaug command-line front end. One subcommand per pipeline stage plus the
// end-to-end `pipeline` and `experiment` commands.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qaug/audio.hpp"
#include "qaug/corpus.hpp"
#include "qaug/delex.hpp"
#include "qaug/eval.hpp"
#include "qaug/features.hpp"
#include "qaug/lm.hpp"
#include "qaug/morph.hpp"
#include "qaug/pipeline.hpp"
#include "qaug/process.hpp"
#include "qaug/random.hpp"
#include "qaug/text_io.hpp"
#include "qaug/textgen.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace qaug;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string adapter;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "INI config file")->check(CLI::ExistingFile);
  app->add_option("--seed", c.seed, "global seed (overrides the config)");
  app->add_option("--out", c.out, "output directory (overrides the config)");
  app->add_option("--adapter", c.adapter, "external generator/TTS command line");
}

pipeline::PipelineConfig load_config(const Common& c, bool required) {
  if (c.config.empty() && required) throw InvalidArgument("--config is required");
  auto cfg = c.config.empty() ? pipeline::PipelineConfig{} : pipeline::PipelineConfig::load(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.out.empty()) cfg.out_dir = c.out;
  return cfg;
}

fs::path out_dir(const Common& c, const pipeline::PipelineConfig& cfg) {
  fs::path d = c.out.empty() ? cfg.out_dir : fs::path(c.out);
  fs::create_directories(d);
  return d;
}

void require(const fs::path& p, const char* what) {
  if (p.empty()) throw InvalidArgument(std::string(what) + " is not set (config or flag)");
}

morph::Analyzer load_analyzer(const pipeline::PipelineConfig& cfg) {
  require(cfg.suffix_rules, "inputs.suffix_rules");
  require(cfg.suffix_inventory, "inputs.suffix_inventory");
  require(cfg.lemma_lexicon, "inputs.lemma_lexicon");
  return morph::Analyzer::load(cfg.suffix_rules, cfg.suffix_inventory, cfg.lemma_lexicon);
}

corpus::Manifest load_resolved(const fs::path& path, corpus::LoadOptions opts = {}) {
  return pipeline::resolve_audio_paths(corpus::load_manifest(path, opts), fs::absolute(path).parent_path());
}

std::optional<corpus::Split> parse_split_filter(const std::string& s) {
  if (s == "all") return std::nullopt;
  return corpus::parse_split(s);
}

std::string lines_of(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& l : v) out += l + "\n";
  return out;
}

std::vector<std::string> nonblank_lines(const fs::path& p) {
  std::vector<std::string> out;
  for (auto& l : read_lines(p))
    if (!trim(l).empty()) out.emplace_back(trim(l));
  return out;
}

void sidecar(const fs::path& dir, const std::string& stage, const pipeline::PipelineConfig* cfg,
             std::uint64_t seed, const json& details) {
  pipeline::write_run_metadata(dir / (stage + ".run.json"), stage, cfg, seed, details);
}

const pipeline::PipelineConfig* cfg_ptr(const Common& c, const pipeline::PipelineConfig& cfg) {
  return c.config.empty() ? nullptr : &cfg;
}

// ---------------------------------------------------------------- stages

int cmd_prepare(const Common& c, const std::string& manifest, const std::string& ratios_arg) {
  auto cfg = load_config(c, false);
  const fs::path in = manifest.empty() ? cfg.manifest : fs::path(manifest);
  require(in, "--manifest");
  auto m = load_resolved(in, {.enforce_max_duration = false});
  const auto dir = out_dir(c, cfg);
  for (auto& r : m.records) {
    if (r.duration_ms > corpus::kMaxSegmentMs) {
      std::string plan;
      for (const auto& s : corpus::segment_plan(r.duration_s())) {
        char buf[64];
        std::snprintf(buf, sizeof buf, " [%.3f, %.3f]", s.start_s, s.end_s);
        plan += buf;
      }
      throw InvalidArgument("record '" + r.id + "' exceeds 30 s; cut it into segments" + plan +
                            " with matching transcripts first");
    }
    auto any = audio::read_wav_any(r.audio_path);
    auto canon = audio::normalize_format(any.mono);
    const auto wav = dir / "audio" / (r.id + ".wav");
    audio::write_wav(canon, wav);
    r.audio_path = fs::absolute(wav).string();
    r.duration_ms = static_cast<std::int64_t>(canon.samples.size()) * 1000 / audio::kCanonicalRate;
  }
  if (!ratios_arg.empty()) {
    auto parts = split(ratios_arg, ',');
    if (parts.size() != 3) throw InvalidArgument("--split-ratios needs three comma-separated fractions");
    std::array<double, 3> ratios{};
    for (int i = 0; i < 3; ++i) ratios[i] = std::stod(parts[i]);
    m = corpus::split_corpus(m, ratios, cfg.seed);
  }
  corpus::save_manifest(pipeline::relativize_audio_paths(m, dir), dir / "manifest.jsonl");
  std::printf("prepared %zu records: train %s h, valid %s h, test %s h\n", m.records.size(),
              pipeline::format_hours(m.split_ms(corpus::Split::kTrain)).c_str(),
              pipeline::format_hours(m.split_ms(corpus::Split::kValid)).c_str(),
              pipeline::format_hours(m.split_ms(corpus::Split::kTest)).c_str());
  sidecar(dir, "prepare", cfg_ptr(c, cfg), cfg.seed, {{"manifest", in.string()}, {"ratios", ratios_arg}});
  return 0;
}

int cmd_normalize(const Common& c, const std::string& input, const std::string& split_arg) {
  auto cfg = load_config(c, true);
  auto analyzer = load_analyzer(cfg);
  std::vector<std::string> texts;
  if (!input.empty()) {
    texts = nonblank_lines(input);
  } else {
    require(cfg.manifest, "inputs.manifest");
    const auto filter = parse_split_filter(split_arg);
    for (const auto& r : corpus::load_manifest(cfg.manifest).records)
      if (!filter || r.split == *filter) texts.push_back(r.text);
  }
  std::string out;
  for (const auto& t : texts) out += join(analyzer.normalize(t), " ") + "\n";
  const auto dir = out_dir(c, cfg);
  write_file(dir / "normalized.txt", out);
  sidecar(dir, "normalize", &cfg, cfg.seed,
          {{"input", input.empty() ? cfg.manifest.string() : input}, {"sentences", texts.size()}});
  return 0;
}

int cmd_delex(const Common& c, const std::string& input, std::optional<std::size_t> frames) {
  auto cfg = load_config(c, true);
  if (frames) cfg.frames_k = *frames;
  auto res = pipeline::Resources::load(cfg);
  std::vector<std::pair<std::string, std::string>> texts;
  if (!input.empty()) {
    std::size_t n = 0;
    for (auto& l : nonblank_lines(input)) texts.emplace_back("line-" + std::to_string(++n), l);
  } else {
    require(cfg.manifest, "inputs.manifest");
    for (const auto& r : corpus::load_manifest(cfg.manifest).records)
      if (r.split == corpus::Split::kTrain) texts.emplace_back(r.id, r.text);
  }
  auto dc = pipeline::delexicalize_corpus(texts, res, cfg.frames_k);
  const auto dir = out_dir(c, cfg);
  std::string delex;
  for (const auto& r : dc.results) delex += r.sentence.render() + "\n";
  write_file(dir / "delex.txt", delex);
  write_file(dir / "slot_vocab.tsv", dc.vocab.to_tsv());
  write_file(dir / "frames.txt", lines_of(dc.selected_frames));
  write_file(dir / "tagging.tsv", pipeline::render_tagging(dc));
  std::printf("delexicalized %zu sentences; frames: %s\n", texts.size(), join(dc.selected_frames, ", ").c_str());
  sidecar(dir, "delex", &cfg, cfg.seed, {{"sentences", texts.size()}, {"frames", dc.selected_frames}});
  return 0;
}

int cmd_gen_text(const Common& c, const std::string& delex_file, std::optional<std::size_t> count) {
  auto cfg = load_config(c, false);
  std::vector<delex::DelexSentence> corpus_sents;
  for (const auto& l : nonblank_lines(delex_file)) corpus_sents.push_back(delex::parse_template(l));
  const std::size_t n = count ? *count : cfg.count.value_or(corpus_sents.size());
  std::vector<delex::DelexSentence> out;
  json details{{"delex", delex_file}, {"count", n}};
  if (!c.adapter.empty()) {
    ExternalProcessClient client(ExternalProcessClient::split_command_line(c.adapter));
    auto gen = textgen::external_generate(client, corpus_sents, n);
    client.finish();
    for (const auto& rej : gen.rejects)
      std::fprintf(stderr, "qaug gen-text: rejected response line %zu: %s\n", rej.line, rej.reason.c_str());
    details["rejects"] = gen.rejects.size();
    for (auto& r : textgen::rank_candidates(gen.templates, corpus_sents, cfg.gen.diversity_floor))
      out.push_back(std::move(r.sentence));
  } else {
    auto g = cfg.gen;
    g.count = n;
    g.seed = derive_seed(cfg.seed, "generate");
    out = textgen::generate_templates(corpus_sents, g);
  }
  const auto dir = out_dir(c, cfg);
  std::string text;
  for (const auto& s : out) text += s.render() + "\n";
  write_file(dir / "templates.txt", text);
  std::printf("generated %zu of %zu requested templates\n", out.size(), n);
  details["generated"] = out.size();
  sidecar(dir, "gen-text", cfg_ptr(c, cfg), cfg.seed, details);
  return 0;
}

int cmd_realize(const Common& c, const std::string& templates, const std::string& vocab_file) {
  auto cfg = load_config(c, false);
  auto vocab = delex::SlotVocabulary::from_tsv(vocab_file);
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& l : nonblank_lines(templates)) {
    out.push_back(textgen::realize(delex::parse_template(l), vocab, derive_seed(cfg.seed, "realize:" + std::to_string(i))));
    ++i;
  }
  const auto dir = out_dir(c, cfg);
  write_file(dir / "synthetic_text.txt", lines_of(out));
  sidecar(dir, "realize", cfg_ptr(c, cfg), cfg.seed, {{"templates", templates}, {"vocab", vocab_file}});
  return 0;
}

int cmd_train_lm(const Common& c, const std::vector<std::string>& texts, std::optional<int> order,
                 std::optional<double> kappa) {
  auto cfg = load_config(c, false);
  auto lcfg = cfg.lm;
  if (order) lcfg.order = *order;
  if (kappa) lcfg.kappa = *kappa;
  lcfg.seed = derive_seed(cfg.seed, "lm");
  std::vector<lm::Sentence> sents;
  for (const auto& t : texts) {
    auto s = lm::read_sentences(read_file(t));
    sents.insert(sents.end(), s.begin(), s.end());
  }
  auto model = lm::NGramLM::train(sents, lcfg);
  const auto dir = out_dir(c, cfg);
  write_file(dir / "lm.arpa", model.to_arpa());
  std::printf("trained order-%d LM: %zu sentences, vocab %zu, %zu of %zu hapax types replaced\n", model.order(),
              sents.size(), model.vocab().size(), model.pruning().replaced.size(), model.pruning().hapax_total);
  for (int k : model.degenerate_orders())
    std::fprintf(stderr, "qaug train-lm: order %d has a zero count-of-counts; discounts fall back to 0.75\n", k);
  sidecar(dir, "train-lm", cfg_ptr(c, cfg), cfg.seed,
          {{"text", texts}, {"order", lcfg.order}, {"kappa", lcfg.kappa}, {"degenerate_orders", model.degenerate_orders()}});
  return 0;
}

int cmd_perplexity(const std::string& lm_file, const std::string& text) {
  auto model = lm::ArpaModel::parse(read_file(lm_file));
  auto sents = lm::read_sentences(read_file(text));
  std::size_t tokens = 0;
  for (const auto& s : sents) tokens += s.size() + 1;
  std::printf("perplexity %.6f over %zu tokens\n", model.perplexity(sents), tokens);
  return 0;
}

int cmd_synth(const Common& c, const std::string& text, const std::string& origin_arg, const std::string& prefix_arg,
              const std::string& speaker, const std::string& dialect, const std::string& split_arg) {
  auto cfg = load_config(c, false);
  const auto origin = corpus::parse_origin(origin_arg);
  const auto split_v = corpus::parse_split(split_arg);
  const std::string prefix = !prefix_arg.empty() ? prefix_arg : origin == corpus::Origin::kSynthetic ? "syn-" : "utt-";
  std::optional<audio::G2PTable> g2p;
  std::optional<ExternalProcessClient> client;
  if (c.adapter.empty()) {
    require(cfg.g2p_table, "inputs.g2p_table");
    g2p = audio::G2PTable::load(cfg.g2p_table);
  } else {
    client.emplace(ExternalProcessClient::split_command_line(c.adapter));
  }
  const auto dir = out_dir(c, cfg);
  corpus::Manifest m;
  std::size_t seq = 0;
  std::map<std::string, std::size_t> unknown;
  for (const auto& line : nonblank_lines(text)) {
    char id[64];
    std::snprintf(id, sizeof id, "%s%06zu", prefix.c_str(), ++seq);
    const auto wav = fs::absolute(dir / "wav" / (std::string(id) + ".wav"));
    fs::create_directories(wav.parent_path());
    audio::AudioBuffer buf;
    if (client) {
      buf = audio::external_tts(*client, line, wav);
    } else {
      auto r = audio::pseudo_tts(line, *g2p, derive_seed(cfg.seed, id), cfg.tts);
      for (const auto& u : r.unknown_graphemes) ++unknown[u];
      buf = std::move(r.audio);
      audio::write_wav(buf, wav);
    }
    corpus::UtteranceRecord rec;
    rec.id = id;
    rec.audio_path = wav.string();
    rec.duration_ms = static_cast<std::int64_t>(buf.samples.size()) * 1000 / audio::kCanonicalRate;
    rec.text = line;
    rec.speaker = speaker.empty() ? cfg.synthetic_speaker : speaker;
    rec.dialect = dialect.empty() ? cfg.synthetic_dialect : dialect;
    rec.split = split_v;
    rec.origin = origin;
    if (rec.duration_ms > corpus::kMaxSegmentMs)
      throw InvalidArgument("synthesized '" + rec.id + "' runs past 30 s; shorten the sentence");
    m.records.push_back(std::move(rec));
  }
  if (client) client->finish();
  corpus::save_manifest(pipeline::relativize_audio_paths(m, dir), dir / "manifest.jsonl");
  for (const auto& [g, n] : unknown)
    std::fprintf(stderr, "qaug synth: unknown grapheme '%s' rendered as silence (%zu times)\n", g.c_str(), n);
  std::printf("synthesized %zu utterances, %s h\n", m.records.size(), pipeline::format_hours(m.total_ms()).c_str());
  sidecar(dir, "synth", cfg_ptr(c, cfg), cfg.seed, {{"text", text}, {"origin", origin_arg}, {"records", m.records.size()}});
  return 0;
}

int cmd_perturb(const Common& c, const std::string& manifest, std::optional<double> factor, const std::string& split_arg) {
  auto cfg = load_config(c, false);
  const fs::path in = manifest.empty() ? cfg.manifest : fs::path(manifest);
  require(in, "--manifest");
  auto m = load_resolved(in);
  const auto filter = parse_split_filter(split_arg);
  const auto dir = out_dir(c, cfg);
  corpus::Manifest out;
  for (const auto& r : m.records) {
    if (filter && r.split != *filter) continue;
    const double f = factor ? *factor : audio::sample_speed_factor(cfg.seed, r.id, cfg.speed_min, cfg.speed_max);
    auto buf = audio::speed_perturb(audio::read_wav_strict(r.audio_path), f);
    auto d = r;
    d.id = "dist-" + r.id;
    d.audio_path = fs::absolute(dir / "wav" / (d.id + ".wav")).string();
    d.origin = corpus::Origin::kDistorted;
    d.duration_ms = static_cast<std::int64_t>(buf.samples.size()) * 1000 / audio::kCanonicalRate;
    d.extra["speed_factor"] = f;
    audio::write_wav(buf, d.audio_path);
    out.records.push_back(std::move(d));
  }
  corpus::save_manifest(pipeline::relativize_audio_paths(out, dir), dir / "manifest.jsonl");
  std::printf("perturbed %zu utterances: %s h -> %s h\n", out.records.size(),
              pipeline::format_hours(m.total_ms()).c_str(), pipeline::format_hours(out.total_ms()).c_str());
  sidecar(dir, "perturb", cfg_ptr(c, cfg), cfg.seed, {{"manifest", in.string()}, {"records", out.records.size()}});
  return 0;
}

int cmd_features(const Common& c, const std::string& manifest, const std::string& wav, const std::string& kind,
                 bool no_deltas, bool no_normalize, bool csv) {
  auto cfg = load_config(c, false);
  features::FeatureConfig fcfg;
  fcfg.deltas = !no_deltas;
  if (kind != "mfcc" && kind != "power") throw InvalidArgument("--kind must be mfcc or power");
  std::vector<std::tuple<std::string, fs::path, std::string>> items;
  if (!wav.empty()) {
    items.emplace_back(fs::path(wav).stem().string(), wav, "");
  } else {
    const fs::path in = manifest.empty() ? cfg.manifest : fs::path(manifest);
    require(in, "--manifest or --wav");
    for (const auto& r : load_resolved(in).records) items.emplace_back(r.id, r.audio_path, r.text);
  }
  const auto dir = out_dir(c, cfg);
  std::string index;
  for (const auto& [id, path, text] : items) {
    auto buf = audio::read_wav_strict(path);
    auto m = kind == "mfcc" ? features::mfcc(buf, fcfg) : features::power_spectrum(buf, fcfg);
    if (!no_normalize && m.rows > 0) m = features::normalize_sequence(m);
    const auto feat = dir / (id + ".feat");
    write_file(feat, features::encode_dump(m));
    if (csv) write_file(dir / (id + ".csv"), features::to_csv(m));
    json j{{"id", id}, {"features", feat.filename().string()}, {"rows", m.rows}, {"cols", m.cols}, {"text", text}};
    index += j.dump() + "\n";
  }
  write_file(dir / "features.jsonl", index);
  sidecar(dir, "features", cfg_ptr(c, cfg), cfg.seed,
          {{"kind", kind}, {"deltas", fcfg.deltas}, {"normalized", !no_normalize}, {"utterances", items.size()}});
  return 0;
}

int cmd_score(const Common& c, const std::string& ref, const std::string& hyp, const std::string& manifest, bool ter) {
  std::optional<morph::Analyzer> analyzer;
  if (ter) analyzer = load_analyzer(load_config(c, true));
  auto report = [](const char* name, const eval::CorpusScore& s) {
    std::printf("%s %s (S=%zu D=%zu I=%zu N=%zu)\n", name, eval::format_percent(s.rate()).c_str(), s.substitutions,
                s.deletions, s.insertions, s.ref_tokens);
  };
  if (!manifest.empty()) {
    auto m = corpus::load_manifest(manifest);
    report("WER", pipeline::score_hypotheses(m, hyp, nullptr));
    if (analyzer) report("TER", pipeline::score_hypotheses(m, hyp, &*analyzer));
    return 0;
  }
  if (ref.empty()) throw InvalidArgument("give --ref with --hyp, or --manifest with a hypothesis JSONL");
  auto refs = read_lines(ref);
  auto hyps = read_lines(hyp);
  while (!refs.empty() && trim(refs.back()).empty()) refs.pop_back();
  while (!hyps.empty() && trim(hyps.back()).empty()) hyps.pop_back();
  if (refs.size() != hyps.size())
    throw InvalidArgument("ref has " + std::to_string(refs.size()) + " lines, hyp has " + std::to_string(hyps.size()));
  std::vector<eval::TokenPair> words, morphs;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    words.emplace_back(morph::tokenize(refs[i]), morph::tokenize(hyps[i]));
    if (analyzer) morphs.emplace_back(analyzer->morphemes(refs[i]), analyzer->morphemes(hyps[i]));
  }
  report("WER", eval::corpus_score(words));
  if (analyzer) report("TER", eval::corpus_score(morphs));
  return 0;
}

int cmd_pipeline(const Common& c, const std::string& tts_adapter) {
  auto cfg = load_config(c, true);
  if (!c.adapter.empty()) cfg.generator_adapter = c.adapter;
  if (!tts_adapter.empty()) cfg.tts_adapter = tts_adapter;
  auto r = pipeline::run_pipeline(cfg);
  std::printf("natural train records %zu, synthetic records %zu, merged %zu -> %s\n", r.natural_train_records,
              r.report["synthetic_records"].get<std::size_t>(), r.merged.records.size(),
              (cfg.out_dir / "manifest.merged.jsonl").string().c_str());
  return 0;
}

int cmd_experiment(const Common& c, const std::string& tts_adapter, const std::vector<std::string>& hyp_args,
                   const std::string& hyp_all) {
  auto cfg = load_config(c, true);
  if (!c.adapter.empty()) cfg.generator_adapter = c.adapter;
  if (!tts_adapter.empty()) cfg.tts_adapter = tts_adapter;
  pipeline::HypothesisFiles hyps;
  if (!hyp_all.empty())
    for (const auto& n : pipeline::variant_names()) hyps[n] = hyp_all;
  for (const auto& h : hyp_args) {
    auto eq = h.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--hyp expects variant=path, got '" + h + "'");
    hyps[h.substr(0, eq)] = h.substr(eq + 1);
  }
  auto r = pipeline::run_experiment(cfg, hyps);
  std::fputs(r.table4.to_text().c_str(), stdout);
  std::fputs("\n", stdout);
  std::fputs(r.table5.to_text().c_str(), stdout);
  return 0;
}

template <typename Fn>
int guarded(const std::string& stage, Fn&& fn) {
  try {
    return fn();
  } catch (const pipeline::StageError& e) {
    std::fprintf(stderr, "qaug %s: %s\n", stage.c_str(), e.what());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qaug %s: stage '%s' failed: %s\n", stage.c_str(), stage.c_str(), e.what());
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qaug: text and speech data augmentation for low-resource ASR"};
  app.require_subcommand(1);
  std::map<std::string, std::function<int()>> actions;

  auto add = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    return sub;
  };

  Common c;
  std::string manifest, input, split_arg = "all", ratios, delex_file, templates, vocab, lm_file, text, origin = "natural",
                        prefix, speaker, dialect, wav, kind = "mfcc", ref, hyp, tts_adapter, hyp_all;
  std::vector<std::string> texts, hyp_args;
  std::optional<std::size_t> frames, count;
  std::optional<int> order;
  std::optional<double> kappa, factor;
  bool no_deltas = false, no_normalize = false, csv = false, ter = false;
  std::string synth_split = "train";

  auto* prepare = add("prepare", "convert manifest audio to 16 kHz mono 16-bit and assign splits");
  add_common(prepare, c);
  prepare->add_option("--manifest", manifest, "raw manifest (default: inputs.manifest)");
  prepare->add_option("--split-ratios", ratios, "train,valid,test fractions by duration");
  actions["prepare"] = [&] { return cmd_prepare(c, manifest, ratios); };

  auto* normalize = add("normalize", "tokenize and standardize suffixes");
  add_common(normalize, c);
  normalize->add_option("--input", input, "plain text, one sentence per line (default: manifest transcripts)");
  normalize->add_option("--split", split_arg, "train|valid|test|all")->check(CLI::IsMember({"train", "valid", "test", "all"}));
  actions["normalize"] = [&] { return cmd_normalize(c, input, split_arg); };

  auto* delex_cmd = add("delex", "delexicalize transcripts against the frame lexicon");
  add_common(delex_cmd, c);
  delex_cmd->add_option("--input", input, "plain text, one sentence per line (default: manifest train transcripts)");
  delex_cmd->add_option("--frames", frames, "number of frames to select");
  actions["delex"] = [&] { return cmd_delex(c, input, frames); };

  auto* gen = add("gen-text", "generate and rank synthetic templates");
  add_common(gen, c);
  gen->add_option("--delex", delex_file, "delexicalized corpus file")->required()->check(CLI::ExistingFile);
  gen->add_option("--count", count, "templates to generate (default: one per input sentence)");
  actions["gen-text"] = [&] { return cmd_gen_text(c, delex_file, count); };

  auto* realize = add("realize", "fill template slots from the slot vocabulary");
  add_common(realize, c);
  realize->add_option("--templates", templates, "templates file")->required()->check(CLI::ExistingFile);
  realize->add_option("--vocab", vocab, "slot vocabulary TSV")->required()->check(CLI::ExistingFile);
  actions["realize"] = [&] { return cmd_realize(c, templates, vocab); };

  auto* train = add("train-lm", "train a modified Kneser-Ney LM and write ARPA");
  add_common(train, c);
  train->add_option("--text", texts, "training text, one sentence per line")->required()->check(CLI::ExistingFile);
  train->add_option("--order", order, "n-gram order (default 4)");
  train->add_option("--kappa", kappa, "singleton pruning rate (default 0.04)");
  actions["train-lm"] = [&] { return cmd_train_lm(c, texts, order, kappa); };

  auto* ppl = add("perplexity", "perplexity of an ARPA model on a text");
  ppl->add_option("--lm", lm_file, "ARPA file")->required()->check(CLI::ExistingFile);
  ppl->add_option("--text", text, "evaluation text")->required()->check(CLI::ExistingFile);
  actions["perplexity"] = [&] { return cmd_perplexity(lm_file, text); };

  auto* synth = add("synth", "synthesize audio for each line of a text file");
  add_common(synth, c);
  synth->add_option("--text", text, "one sentence per line")->required()->check(CLI::ExistingFile);
  synth->add_option("--origin", origin, "origin tag for the records")
      ->check(CLI::IsMember({"natural", "distorted", "synthetic"}));
  synth->add_option("--id-prefix", prefix, "id prefix (default syn- or utt-)");
  synth->add_option("--speaker", speaker, "speaker field");
  synth->add_option("--dialect", dialect, "dialect field");
  synth->add_option("--split", synth_split, "split for the records")->check(CLI::IsMember({"train", "valid", "test"}));
  actions["synth"] = [&] { return cmd_synth(c, text, origin, prefix, speaker, dialect, synth_split); };

  auto* perturb = add("perturb", "speed-perturb manifest audio");
  add_common(perturb, c);
  perturb->add_option("--manifest", manifest, "input manifest (default: inputs.manifest)");
  perturb->add_option("--factor", factor, "fixed factor (default: seeded per item from the configured range)");
  perturb->add_option("--split", split_arg, "train|valid|test|all")->check(CLI::IsMember({"train", "valid", "test", "all"}));
  actions["perturb"] = [&] { return cmd_perturb(c, manifest, factor, split_arg); };

  auto* feats = add("features", "extract MFCC or power-spectrum features");
  add_common(feats, c);
  feats->add_option("--manifest", manifest, "manifest (default: inputs.manifest)");
  feats->add_option("--wav", wav, "single WAV instead of a manifest")->check(CLI::ExistingFile);
  feats->add_option("--kind", kind, "mfcc|power")->check(CLI::IsMember({"mfcc", "power"}));
  feats->add_flag("--no-deltas", no_deltas, "omit first and second derivatives");
  feats->add_flag("--no-normalize", no_normalize, "skip per-sequence normalization");
  feats->add_flag("--csv", csv, "also write CSV");
  actions["features"] = [&] { return cmd_features(c, manifest, wav, kind, no_deltas, no_normalize, csv); };

  auto* score = add("score", "WER (and TER) of hypotheses against references");
  add_common(score, c);
  score->add_option("--ref", ref, "reference text, one utterance per line")->check(CLI::ExistingFile);
  score->add_option("--hyp", hyp, "hypothesis text or JSONL")->required()->check(CLI::ExistingFile);
  score->add_option("--manifest", manifest, "manifest holding references; --hyp is then JSONL")->check(CLI::ExistingFile);
  score->add_flag("--ter", ter, "also report morpheme-level TER (needs --config)");
  actions["score"] = [&] { return cmd_score(c, ref, hyp, manifest, ter); };

  auto* pipe = add("pipeline", "run the full augmentation pipeline");
  add_common(pipe, c);
  pipe->add_option("--tts-adapter", tts_adapter, "external TTS command line");
  actions["pipeline"] = [&] { return cmd_pipeline(c, tts_adapter); };

  auto* exp = add("experiment", "materialize the experiment variants and report tables");
  add_common(exp, c);
  exp->add_option("--tts-adapter", tts_adapter, "external TTS command line");
  exp->add_option("--hyp", hyp_args, "variant=hypothesis.jsonl (repeatable)");
  exp->add_option("--hyp-all", hyp_all, "one hypothesis JSONL used for every variant")->check(CLI::ExistingFile);
  actions["experiment"] = [&] { return cmd_experiment(c, tts_adapter, hyp_args, hyp_all); };

  CLI11_PARSE(app, argc, argv);
  for (auto* sub : app.get_subcommands()) return guarded(sub->get_name(), actions.at(sub->get_name()));
  return 1;
}
