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

#include <doctest.h>

#include <cmath>
#include <cstring>

#include "qaug/audio.hpp"
#include "qaug/random.hpp"
#include "qaug/text_io.hpp"
#include "test_util.hpp"

using namespace qaug;
using namespace qaug::audio;

namespace {

AudioBuffer ramp(std::size_t n) {
  AudioBuffer b;
  b.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) b.samples[i] = static_cast<std::int16_t>((i * 37) % 20000 - 10000);
  return b;
}

std::uint32_t le32(const std::string& s, std::size_t off) {
  std::uint32_t v;
  std::memcpy(&v, s.data() + off, 4);
  return v;
}

// Minimal WAV writer for formats the library refuses to write.
std::string raw_wav(std::uint16_t tag, std::uint16_t channels, std::uint32_t rate, std::uint16_t bits,
                    const std::string& payload) {
  std::string out;
  auto put16 = [&](std::uint16_t v) { out.append(reinterpret_cast<const char*>(&v), 2); };
  auto put32 = [&](std::uint32_t v) { out.append(reinterpret_cast<const char*>(&v), 4); };
  out += "RIFF";
  put32(static_cast<std::uint32_t>(36 + payload.size()));
  out += "WAVEfmt ";
  put32(16);
  put16(tag);
  put16(channels);
  put32(rate);
  put32(rate * channels * bits / 8);
  put16(static_cast<std::uint16_t>(channels * bits / 8));
  put16(bits);
  out += "data";
  put32(static_cast<std::uint32_t>(payload.size()));
  return out + payload;
}

const G2PTable& g2p() {
  static const G2PTable t = G2PTable::load(testutil::data_dir() / "g2p.tsv");
  return t;
}

std::size_t closed_form_samples(std::string_view text, const TtsConfig& cfg) {
  std::size_t ms = 0;
  auto words = morph::tokenize(text);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w) ms += static_cast<std::size_t>(cfg.word_gap_ms);
    for (const auto& u : g2p().segment(words[w]))
      ms += static_cast<std::size_t>(u.phoneme ? u.phoneme->dur_ms : cfg.unknown_ms);
  }
  return ms * 16;
}

}  // namespace

TEST_CASE("canonical WAV round trip is bit exact") {
  auto b = ramp(16000);
  const auto bytes = encode_wav(b);
  CHECK(bytes.size() == 44 + 32000);
  CHECK(bytes.substr(0, 4) == "RIFF");
  CHECK(bytes.substr(8, 8) == "WAVEfmt ");
  CHECK(le32(bytes, 40) == 32000);
  CHECK(decode_wav_strict(bytes) == b);
  CHECK(encode_wav(decode_wav_strict(bytes)) == bytes);
  auto dir = testutil::scratch("audio");
  write_wav(b, dir / "a.wav");
  CHECK(read_wav_strict(dir / "a.wav") == b);
  CHECK(decode_wav_strict(encode_wav(AudioBuffer{})).samples.empty());
}

TEST_CASE("strict reader rejects other formats") {
  std::string stereo(44100 * 4 / 10, '\0');
  CHECK_THROWS_AS(decode_wav_strict(raw_wav(1, 2, 44100, 16, stereo)), UnsupportedEncoding);
  CHECK_THROWS_AS(decode_wav_strict(raw_wav(1, 1, 8000, 16, std::string(100, '\0'))), UnsupportedEncoding);
  CHECK_THROWS_AS(decode_wav_strict(raw_wav(3, 1, 16000, 32, std::string(100, '\0'))), UnsupportedEncoding);
  CHECK_THROWS_AS(decode_wav_strict("not a wav file at all, really not"), NotWav);
  CHECK_THROWS_AS(decode_wav_strict(""), NotWav);
}

TEST_CASE("unknown chunks are skipped") {
  auto b = ramp(10);
  auto bytes = encode_wav(b);
  std::string list = "LIST";
  std::uint32_t n = 4;
  list.append(reinterpret_cast<const char*>(&n), 4);
  list += "abcd";
  bytes.insert(36, list);
  CHECK(decode_wav_strict(bytes) == b);
}

TEST_CASE("decode_wav_any and normalize_format") {
  std::string payload;
  for (int i = 0; i < 4410; ++i) {
    std::int16_t l = 1000, r = 3000;
    payload.append(reinterpret_cast<const char*>(&l), 2);
    payload.append(reinterpret_cast<const char*>(&r), 2);
  }
  auto any = decode_wav_any(raw_wav(1, 2, 44100, 16, payload));
  CHECK(any.format.channels == 2);
  CHECK(any.format.sample_rate == 44100);
  CHECK(any.mono.samples.size() == 4410);
  CHECK(any.mono.samples[7] == 2000);
  auto norm = normalize_format(any.mono);
  CHECK(norm.sample_rate == kCanonicalRate);
  CHECK(norm.samples.size() == 1600);
  for (auto s : norm.samples) CHECK(s == 2000);

  std::string u8(800, static_cast<char>(128));
  auto a8 = decode_wav_any(raw_wav(1, 1, 8000, 8, u8));
  CHECK(normalize_format(a8.mono).samples.size() == 1600);
  CHECK(normalize_format(ramp(50)) == ramp(50));
}

TEST_CASE("speed_perturb lengths") {
  auto one_second = ramp(16000);
  CHECK(speed_perturb(one_second, 1.15).samples.size() == 13913);
  CHECK(speed_perturb(one_second, 0.85).samples.size() == 18824);
  CHECK(speed_perturb(one_second, 1.0) == one_second);
  CHECK_THROWS_AS(speed_perturb(one_second, 0.4), FactorOutOfRange);
  CHECK_THROWS_AS(speed_perturb(one_second, 2.1), FactorOutOfRange);
  CHECK(speed_perturb(AudioBuffer{}, 1.1).samples.empty());
  Rng rng(99);
  for (int i = 0; i < 100; ++i) {
    const std::size_t len = 1 + rng.below(50000);
    const double f = 0.85 + 0.3 * rng.uniform();
    CAPTURE(len);
    CAPTURE(f);
    CHECK(speed_perturb(ramp(len), f).samples.size() == round_length(static_cast<double>(len) / f));
  }
}

TEST_CASE("round_length rounds half away from zero") {
  CHECK(round_length(2.5) == 3);
  CHECK(round_length(2.4999) == 2);
  CHECK(round_length(0.0) == 0);
}

TEST_CASE("sample_speed_factor") {
  CHECK(sample_speed_factor(3, "utt1") == sample_speed_factor(3, "utt1"));
  CHECK(sample_speed_factor(3, "utt1") != sample_speed_factor(3, "utt2"));
  double sum = 0;
  for (int i = 0; i < 10000; ++i) {
    const double f = sample_speed_factor(5, "u" + std::to_string(i));
    CHECK(f >= 0.85);
    CHECK(f <= 1.15);
    sum += f;
  }
  CHECK(sum / 10000 == doctest::Approx(1.0).epsilon(0.005));
  CHECK(sample_speed_factor(5, "x", 1.0, 1.0) == 1.0);
}

TEST_CASE("G2P segmentation") {
  auto units = g2p().segment("chaki");
  REQUIRE(units.size() == 4);
  CHECK(units[0].grapheme == "ch");
  CHECK(units[0].phoneme != nullptr);
  auto ll = g2p().segment("llama");
  CHECK(ll[0].grapheme == "ll");
  auto unk = g2p().segment("x1");
  CHECK(unk.back().phoneme == nullptr);
}

TEST_CASE("pseudo-TTS") {
  SUBCASE("one word") {
    auto r = pseudo_tts("wasi", g2p(), 1);
    CHECK(r.audio.samples.size() == 5120);
    CHECK(r.audio.sample_rate == kCanonicalRate);
    CHECK(r.unknown_graphemes.empty());
  }
  SUBCASE("closed-form duration") {
    TtsConfig cfg;
    for (const char* text : {"wasi", "kaywata pitasi riqiragchu", "t'anta x9 ñawi", "", "a  b"}) {
      CAPTURE(text);
      CHECK(pseudo_tts(text, g2p(), 4, cfg).audio.samples.size() == closed_form_samples(text, cfg));
    }
    cfg.word_gap_ms = 0;
    cfg.unknown_ms = 5;
    CHECK(pseudo_tts("xx qq", g2p(), 4, cfg).audio.samples.size() == closed_form_samples("xx qq", cfg));
  }
  SUBCASE("deterministic, bounded and seed-sensitive for noise") {
    auto a = pseudo_tts("chaki sapa", g2p(), 7);
    CHECK(a.audio == pseudo_tts("chaki sapa", g2p(), 7).audio);
    CHECK_FALSE(a.audio == pseudo_tts("chaki sapa", g2p(), 8).audio);
    TtsConfig cfg;
    cfg.peak = 0.25;
    for (auto s : pseudo_tts("chaki sapa", g2p(), 7, cfg).audio.samples) CHECK(std::abs(s) <= 0.25 * 32767 + 1);
  }
  SUBCASE("unknown graphemes are reported") {
    auto r = pseudo_tts("k9ü", g2p(), 1);
    CHECK(r.unknown_graphemes == std::vector<std::string>{"9", "ü"});
  }
  SUBCASE("output encodes as canonical WAV") {
    auto r = pseudo_tts("wasi", g2p(), 1);
    CHECK(decode_wav_strict(encode_wav(r.audio)) == r.audio);
  }
}
