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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Builds its own mini-corpus from the bundled sentences.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "oracles/brute.hpp"
#include "oracles/kn_oracle.hpp"
#include "qaug/audio.hpp"
#include "qaug/corpus.hpp"
#include "qaug/delex.hpp"
#include "qaug/eval.hpp"
#include "qaug/features.hpp"
#include "qaug/lm.hpp"
#include "qaug/morph.hpp"
#include "qaug/pipeline.hpp"
#include "qaug/random.hpp"
#include "qaug/text_io.hpp"

namespace fs = std::filesystem;
using namespace qaug;

namespace {

const fs::path kData = fs::path(QAUG_SOURCE_DIR) / "data";
const fs::path kWork = fs::path(QAUG_TEST_BINARY_DIR) / "acceptance";

// Collects failures for the current criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
    if (!ok) ++failed;
  }
  std::size_t failed = 0;
};

int g_failed = 0;

void criterion(const char* name, double budget_s, const std::function<std::string(Check&)>& body) {
  Check c;
  std::string note;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    note = body(c);
  } catch (const std::exception& e) {
    c.expect(false, std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0) c.expect(secs < budget_s, "runtime " + std::to_string(secs) + " s over budget");
  const bool ok = c.failed == 0;
  if (!ok) ++g_failed;
  std::printf("%s  %-28s %8.3f s  %s\n", ok ? "PASS" : "FAIL", name, secs, note.c_str());
  for (const auto& f : c.failures) std::printf("      - %s\n", f.c_str());
  if (c.failed > c.failures.size()) std::printf("      - ... %zu failures in total\n", c.failed);
  std::fflush(stdout);
}

morph::Analyzer analyzer() {
  return morph::Analyzer::load(kData / "suffix_rules.tsv", kData / "suffix_inventory.tsv", kData / "lemma_lexicon.tsv");
}

std::vector<std::string> mini_sentences() {
  std::vector<std::string> out;
  for (const auto& l : read_lines(kData / "mini" / "sentences.txt"))
    if (!trim(l).empty()) out.push_back(l);
  return out;
}

// Natural audio for the mini-corpus plus a config pointing at it.
fs::path build_mini_corpus() {
  fs::remove_all(kWork);
  fs::create_directories(kWork / "corpus" / "wav");
  const auto g2p = audio::G2PTable::load(kData / "g2p.tsv");
  corpus::Manifest m;
  std::size_t n = 0;
  for (const auto& text : mini_sentences()) {
    char id[32];
    std::snprintf(id, sizeof id, "mini-%06zu", ++n);
    auto tts = audio::pseudo_tts(text, g2p, derive_seed(1, std::string(id)));
    const auto rel = fs::path("wav") / (std::string(id) + ".wav");
    audio::write_wav(tts.audio, kWork / "corpus" / rel);
    corpus::UtteranceRecord r;
    r.id = id;
    r.audio_path = rel.string();
    r.duration_ms = static_cast<std::int64_t>(tts.audio.samples.size()) / 16;
    r.text = text;
    r.speaker = "spk01";
    m.records.push_back(r);
  }
  corpus::save_manifest(m, kWork / "corpus" / "manifest.jsonl");
  std::string ini = "[inputs]\nmanifest = corpus/manifest.jsonl\n";
  for (const char* key : {"suffix_rules", "suffix_inventory", "lemma_lexicon", "frame_lexicon", "bilingual_map",
                          "pivot_lexicon", "role_lexicon"})
    ini += std::string(key) + " = " + (kData / (std::string(key) + ".tsv")).string() + "\n";
  ini += "g2p_table = " + (kData / "g2p.tsv").string() + "\n";
  ini += "[generation]\ncount = parity\n[run]\nseed = 1\nout = out\n";
  write_file(kWork / "config.ini", ini);
  return kWork / "config.ini";
}

std::string morphology(Check& c) {
  const auto a = analyzer();
  auto t = a.analyze_token("wasichapi");
  c.expect(t.lemma == "wasi" && t.pos == "NOUN", "wasichapi lemma/pos");
  c.expect(t.suffixes.size() == 2 && t.suffixes[0] == morph::SuffixEntry{"cha", "SUF-DI", t.suffixes[0].cls} &&
               t.suffixes[1].form == "pi" && t.suffixes[1].tag == "SUF-LO",
           "wasichapi suffixes");
  std::size_t pairs = 0;
  for (const auto& rule : a.rules())
    for (const auto& v : rule.variants) {
      ++pairs;
      c.expect(morph::standardize_suffixes("miku" + v, a.rules()) == "miku" + rule.standard,
               "variant " + v + " of " + rule.function);
    }
  std::size_t tokens = 0;
  for (const auto& s : mini_sentences())
    for (const auto& tok : morph::tokenize(s)) {
      ++tokens;
      const auto once = a.normalize_token(tok);
      c.expect(a.normalize_token(once) == once, "idempotence on " + tok);
    }
  return std::to_string(pairs) + " variant pairs, " + std::to_string(tokens) + " fixture tokens";
}

std::string delexicalization(Check& c, const fs::path& config) {
  auto cfg = pipeline::PipelineConfig::load(config);
  auto res = pipeline::Resources::load(cfg);
  std::vector<std::pair<std::string, std::string>> texts;
  for (const auto& s : mini_sentences()) texts.emplace_back("s" + std::to_string(texts.size()), s);
  auto dc = pipeline::delexicalize_corpus(texts, res, cfg.frames_k);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    const bool ok = delex::realize_with_fills(dc.results[i].sentence) == morph::tokenize(texts[i].second);
    exact += ok;
    c.expect(ok, "round trip of sentence " + std::to_string(i + 1));
  }
  // The worked-example sentence is the first line of the fixture.
  const auto& fig = dc.results.at(0).sentence;
  std::vector<std::pair<std::size_t, std::string>> slots;
  for (std::size_t i = 0; i < fig.items.size(); ++i)
    if (auto* s = std::get_if<delex::SlotLabel>(&fig.items[i])) slots.emplace_back(i, s->role);
  const std::vector<std::pair<std::size_t, std::string>> expect{
      {0, "B-date"}, {2, "B-fromloc"}, {5, "B-date"}, {9, "B-toloc"}};
  c.expect(slots == expect, "worked-example slots: " + fig.render());
  return std::to_string(exact) + "/" + std::to_string(texts.size()) + " sentences exact; example slots at 0,2,5,9";
}

std::string lm_oracle(Check& c) {
  std::vector<std::vector<lm::Sentence>> fixtures{
      lm::read_sentences("a b c a b\nb c a\na a b c c\nc b a b\na b d\nd a b c a b c\nb b b a\nc a d b\n"),
      lm::read_sentences("a a a\n"),
      lm::read_sentences(read_file(kData / "mini" / "sentences.txt")),
  };
  double worst_p = 0, worst_ppl = 0, worst_norm = 0;
  for (const auto& corpus : fixtures) {
    std::size_t tokens = 0;
    for (const auto& s : corpus) tokens += s.size();
    c.expect(tokens <= 100, "fixture over 100 tokens");
    for (int order = 1; order <= 4; ++order) {
      lm::TrainConfig tc;
      tc.order = order;
      tc.kappa = 0;
      auto model = lm::NGramLM::train(corpus, tc);
      oracle::KneserNey kn(corpus, order);
      std::set<lm::Sentence> histories{{}};
      for (const auto& s : corpus) {
        lm::Sentence padded(static_cast<std::size_t>(order - 1), "<s>");
        padded.insert(padded.end(), s.begin(), s.end());
        for (std::size_t end = 0; end <= padded.size(); ++end)
          for (std::size_t len = 1; len < static_cast<std::size_t>(order) && len <= end; ++len)
            histories.insert(lm::Sentence(padded.begin() + static_cast<long>(end - len),
                                          padded.begin() + static_cast<long>(end)));
      }
      for (const auto& h : histories)
        for (const auto& w : kn.vocab()) worst_p = std::max(worst_p, std::abs(model.prob(w, h) - kn.prob(w, h)));
      const double ref = kn.perplexity(corpus);
      worst_ppl = std::max(worst_ppl, std::abs(model.perplexity(corpus) - ref) / ref);
      for (int k = 1; k <= order; ++k)
        for (const auto& ctx : model.contexts(k)) {
          double total = 0;
          for (const auto& w : model.vocab()) total += model.prob(w, ctx);
          worst_norm = std::max(worst_norm, std::abs(total - 1.0));
        }
    }
  }
  c.expect(worst_p <= 1e-9, "max |P - oracle| = " + std::to_string(worst_p));
  c.expect(worst_ppl <= 1e-6, "max relative perplexity error = " + std::to_string(worst_ppl));
  c.expect(worst_norm <= 1e-9, "max |sum P - 1| = " + std::to_string(worst_norm));

  std::vector<lm::Sentence> hapaxes;
  for (int i = 0; i < 50; ++i) hapaxes.push_back({"common", "h" + std::to_string(i)});
  hapaxes.push_back({"common"});
  const auto replaced = lm::apply_singleton_pruning(hapaxes, 0.04, 1).second.replaced.size();
  c.expect(replaced == 2, "kappa 0.04 over 50 hapaxes replaced " + std::to_string(replaced));
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |dP| %.1e, ppl rel %.1e, |sum-1| %.1e, pruned %zu of 50", worst_p, worst_ppl,
                worst_norm, replaced);
  return buf;
}

std::string audio_laws(Check& c) {
  Rng rng(2026);
  for (int i = 0; i < 100; ++i) {
    audio::AudioBuffer b;
    b.samples.resize(1 + rng.below(48000));
    for (auto& s : b.samples) s = static_cast<std::int16_t>(rng.below(65536) - 32768);
    const double f = 0.85 + 0.30 * rng.uniform();
    const auto out = audio::speed_perturb(b, f).samples.size();
    c.expect(out == audio::round_length(static_cast<double>(b.samples.size()) / f),
             "length law at len " + std::to_string(b.samples.size()));
    if (i < 10) c.expect(audio::speed_perturb(b, 1.0) == b, "factor 1.0 identity");
    const auto bytes = audio::encode_wav(b);
    c.expect(audio::encode_wav(audio::decode_wav_strict(bytes)) == bytes, "WAV round trip");
  }
  const auto g2p = audio::G2PTable::load(kData / "g2p.tsv");
  const audio::TtsConfig cfg;
  std::size_t checked = 0;
  for (const auto& s : mini_sentences()) {
    std::size_t ms = 0;
    auto words = morph::tokenize(s);
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w) ms += static_cast<std::size_t>(cfg.word_gap_ms);
      for (const auto& u : g2p.segment(words[w])) ms += static_cast<std::size_t>(u.phoneme ? u.phoneme->dur_ms : cfg.unknown_ms);
    }
    c.expect(audio::pseudo_tts(s, g2p, 3, cfg).audio.samples.size() == ms * 16, "pseudo-TTS duration: " + s);
    ++checked;
  }
  c.expect(audio::pseudo_tts("wasi", g2p, 1).audio.samples.size() == 5120, "wasi is 5120 samples");
  return "100 speed pairs, 100 WAV round trips, " + std::to_string(checked) + " TTS durations";
}

std::string features_check(Check& c) {
  c.expect(features::frame_count(16000) == 98, "frame_count(16000)");
  Rng rng(5);
  double worst = 0;
  for (std::size_t len : {400u, 451u, 512u}) {
    audio::AudioBuffer b;
    for (std::size_t i = 0; i < len; ++i) b.samples.push_back(static_cast<std::int16_t>(rng.below(30001)) - 15000);
    auto ps = features::power_spectrum(b);
    for (std::size_t r = 0; r < ps.rows; ++r) {
      std::vector<double> frame(400, 0.0);
      for (std::size_t i = 0; i < 400 && r * 160 + i < len; ++i) frame[i] = b.samples[r * 160 + i] / 32768.0;
      const auto expect = oracle::power_dft(frame, 512);
      for (std::size_t k = 0; k < 257; ++k)
        if (expect[k] > 0) worst = std::max(worst, std::abs(ps.at(r, k) - expect[k]) / expect[k]);
    }
  }
  c.expect(worst <= 1e-6, "DFT relative error " + std::to_string(worst));
  audio::AudioBuffer tone;
  for (int i = 0; i < 16000; ++i)
    tone.samples.push_back(static_cast<std::int16_t>(std::lround(8000 * std::sin(2 * std::numbers::pi * 1000 * i / 16000.0))));
  auto ps = features::power_spectrum(tone);
  for (std::size_t r = 0; r < ps.rows; ++r) {
    auto row = ps.row(r);
    c.expect(std::max_element(row.begin(), row.end()) - row.begin() == 32, "1 kHz peak bin");
  }
  audio::AudioBuffer noisy;
  for (int i = 0; i < 32000; ++i) noisy.samples.push_back(static_cast<std::int16_t>(rng.below(20001)) - 10000);
  auto m = features::normalize_sequence(features::mfcc(noisy));
  double worst_mu = 0, worst_sd = 0;
  for (std::size_t col = 0; col < m.cols; ++col) {
    double mu = 0, var = 0;
    for (std::size_t r = 0; r < m.rows; ++r) mu += m.at(r, col);
    mu /= static_cast<double>(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) var += (m.at(r, col) - mu) * (m.at(r, col) - mu);
    worst_mu = std::max(worst_mu, std::abs(mu));
    worst_sd = std::max(worst_sd, std::abs(std::sqrt(var / static_cast<double>(m.rows)) - 1.0));
  }
  c.expect(worst_mu < 1e-9 && worst_sd < 1e-9, "normalization");
  char buf[160];
  std::snprintf(buf, sizeof buf, "DFT rel err %.1e, %zux%zu MFCC |mu| %.1e |sd-1| %.1e", worst, m.rows, m.cols,
                worst_mu, worst_sd);
  return buf;
}

// Plain Wagner-Fischer on small integer codes.
std::size_t dp_distance(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string evaluation(Check& c) {
  // Every sequence of length <= 8 over {a, b, c}.
  std::vector<std::vector<int>> seqs{{}};
  for (std::size_t i = 0; seqs[i].size() < 8 || i + 1 < seqs.size(); ++i) {
    if (seqs[i].size() == 8) break;
    for (int s = 0; s < 3; ++s) {
      auto t = seqs[i];
      t.push_back(s);
      seqs.push_back(std::move(t));
    }
  }
  const std::vector<std::string> names{"a", "b", "c"};
  std::vector<std::vector<std::string>> words;
  for (const auto& s : seqs) {
    std::vector<std::string> w;
    for (int x : s) w.push_back(names[static_cast<std::size_t>(x)]);
    words.push_back(std::move(w));
  }
  // The DP oracle itself agrees with the memoized recursion on short pairs.
  for (std::size_t i = 0; i < seqs.size() && seqs[i].size() <= 4; ++i)
    for (std::size_t j = 0; j < seqs.size() && seqs[j].size() <= 4; ++j)
      c.expect(dp_distance(seqs[i], seqs[j]) == oracle::edit_distance(seqs[i], seqs[j]), "oracle cross-check");

  // Edit distance only sees token equality, so a consistent renaming of the
  // alphabet changes nothing. References in first-occurrence order (first
  // symbol a, first other symbol b) therefore stand for every reference.
  auto canonical = [](const std::vector<int>& s) {
    int next = 0;
    for (int x : s) {
      if (x > next) return false;
      if (x == next) ++next;
    }
    return true;
  };
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (!canonical(seqs[i])) continue;
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      ++pairs;
      const auto a = eval::align(words[i], words[j]);
      const auto d = dp_distance(seqs[i], seqs[j]);
      bool ok = a.errors() == d && a.hits + a.substitutions + a.deletions == seqs[i].size() &&
                a.hits + a.substitutions + a.insertions == seqs[j].size() && a.ops.size() == a.hits + a.errors();
      if (!ok) c.expect(false, "align mismatch at pair " + std::to_string(pairs));
    }
  }
  const double w = eval::wer(std::vector<std::string>{"a", "b", "c"}, std::vector<std::string>{"a", "c"});
  c.expect(std::abs(w - 33.33) <= 0.01, "wer 3-token 1 deletion = " + std::to_string(w));
  std::vector<eval::TokenPair> pooled{{{"x"}, {"y"}}, {{"1", "2", "3", "4", "5", "6", "7", "8", "9"},
                                                      {"1", "2", "3", "4", "5", "6", "7", "8", "9"}}};
  const double p = eval::corpus_score(pooled).rate();
  c.expect(std::abs(p - 10.0) < 1e-12, "pooled = " + std::to_string(p));
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu sequences, %zu canonical pairs, wer %.2f, pooled %.1f", seqs.size(), pairs, w, p);
  return buf;
}

std::string slurp_synth_wavs(const fs::path& out, const corpus::Manifest& m) {
  std::string all;
  for (const auto& r : m.records)
    if (r.origin == corpus::Origin::kSynthetic) {
      auto b = audio::read_wav_strict(out / r.audio_path);
      all.append(reinterpret_cast<const char*>(b.samples.data()), b.samples.size() * 2);
    }
  return all;
}

std::string end_to_end(Check& c, const fs::path& config) {
  auto cfg = pipeline::PipelineConfig::load(config);
  cfg.out_dir = kWork / "run_a";
  auto a = pipeline::run_pipeline(cfg);
  auto cfg_b = cfg;
  cfg_b.out_dir = kWork / "run_b";
  auto b = pipeline::run_pipeline(cfg_b);
  c.expect(read_file(cfg.out_dir / "synthetic_text.txt") == read_file(cfg_b.out_dir / "synthetic_text.txt"),
           "synthetic text differs between runs");
  c.expect(slurp_synth_wavs(cfg.out_dir, a.merged) == slurp_synth_wavs(cfg_b.out_dir, b.merged),
           "WAV payloads differ between runs");
  std::size_t synthetic = 0;
  for (const auto& r : a.merged.records) synthetic += r.origin == corpus::Origin::kSynthetic;
  c.expect(synthetic == a.natural_train_records, "parity: " + std::to_string(synthetic) + " synthetic vs " +
                                                     std::to_string(a.natural_train_records) + " natural");

  cfg.out_dir = kWork / "experiment";
  auto e = pipeline::run_experiment(cfg);
  c.expect(e.table4.rows.size() == 4, "main table rows");
  const double h = static_cast<double>(e.variants.at(0).natural_train_ms);
  const double base = static_cast<double>(e.variants[0].train_ms()) / h;
  const double dist = static_cast<double>(e.variants[1].train_ms()) / (2 * h) - 1.0;
  const double synth = static_cast<double>(e.variants[2].train_ms()) / (2 * h) - 1.0;
  c.expect(base == 1.0, "baseline is H");
  c.expect(std::abs(dist) <= 0.01, "distorted is 2H" + std::string(dist >= 0 ? "+" : "") +
                                       std::to_string(100 * dist) + "%, outside 2H +/- 1%");
  c.expect(std::abs(synth) <= 0.20, "synthetic outside 2H +/- 20%");
  c.expect(e.variants[3].train_ms() == 2 * e.variants[0].natural_train_ms, "doubled is not exactly 2H");
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu synthetic; H=%s h, distorted 2H%+.2f%%, synthetic 2H%+.2f%%, doubled %s h",
                synthetic, pipeline::format_hours(e.variants[0].natural_train_ms).c_str(), 100 * dist, 100 * synth,
                pipeline::format_hours(e.variants[3].train_ms()).c_str());
  return buf;
}

}  // namespace

int main() {
  const auto config = build_mini_corpus();
  criterion("morphology", 1.0, morphology);
  criterion("delexicalization round trip", 0, [&](Check& c) { return delexicalization(c, config); });
  criterion("LM oracle equivalence", 10.0, lm_oracle);
  criterion("audio laws", 0, audio_laws);
  criterion("features", 30.0, features_check);
  criterion("evaluation", 0, evaluation);
  criterion("end-to-end determinism", 60.0, [&](Check& c) { return end_to_end(c, config); });
  std::printf("%s: %d criteria failed\n", g_failed ? "FAIL" : "PASS", g_failed);
  return g_failed ? 1 : 0;
}
