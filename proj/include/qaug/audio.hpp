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

#ifndef QAUG_AUDIO_HPP_
#define QAUG_AUDIO_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "qaug/error.hpp"
#include "qaug/process.hpp"

namespace qaug::audio {

inline constexpr int kCanonicalRate = 16000;

// Mono signed 16-bit samples.
struct AudioBuffer {
  std::vector<std::int16_t> samples;
  int sample_rate = kCanonicalRate;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  bool operator==(const AudioBuffer&) const = default;
};

struct WavFormat {
  std::uint16_t format_tag = 1;  // 1 PCM, 3 IEEE float (extensible resolved)
  std::uint16_t channels = 1;
  std::uint32_t sample_rate = kCanonicalRate;
  std::uint16_t bits_per_sample = 16;

  bool canonical() const {
    return format_tag == 1 && channels == 1 && sample_rate == kCanonicalRate && bits_per_sample == 16;
  }
  std::string describe() const;
};

class NotWav : public Error {
 public:
  using Error::Error;
};

class UnsupportedEncoding : public Error {
 public:
  using Error::Error;
};

class NonCanonicalAudio : public Error {
 public:
  using Error::Error;
};

class FactorOutOfRange : public InvalidArgument {
 public:
  explicit FactorOutOfRange(double f)
      : InvalidArgument("speed factor " + std::to_string(f) + " outside [0.5, 2.0]") {}
};

// RIFF/WAVE, PCM, 1 channel, 16000 Hz, 16-bit little endian. Unknown chunks
// are skipped on read; write emits exactly "RIFF", "fmt " and "data".
std::string encode_wav(const AudioBuffer& buffer);
AudioBuffer decode_wav_strict(std::string_view bytes);
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path);
// Throws NotWav or UnsupportedEncoding for anything but canonical format.
AudioBuffer read_wav_strict(const std::filesystem::path& path);

struct AnyWav {
  WavFormat format;   // as stored in the file
  AudioBuffer mono;   // channels averaged, 16-bit, original rate
};
// Accepts PCM 8/16/24/32-bit and 32-bit float at any rate and channel count.
AnyWav decode_wav_any(std::string_view bytes);
AnyWav read_wav_any(const std::filesystem::path& path);

// Linear-interpolation resampling to 16 kHz. Output length is
// round(len * 16000 / rate).
AudioBuffer normalize_format(const AudioBuffer& buffer);

// Time-axis resampling: output sample i interpolates input position i*factor,
// output length round(len / factor). Pitch moves with speed.
AudioBuffer speed_perturb(const AudioBuffer& buffer, double factor);

inline constexpr double kSpeedMin = 0.85;
inline constexpr double kSpeedMax = 1.15;

// Uniform in [lo, hi], derived from (seed, item_id) only.
double sample_speed_factor(std::uint64_t seed, std::string_view item_id, double lo = kSpeedMin,
                           double hi = kSpeedMax);

// Round half away from zero, the rule used for every fractional length.
std::size_t round_length(double x);

struct Phoneme {
  std::string id;
  double freq_hz = 0;  // 0 renders silence
  int dur_ms = 80;
  bool voiced = true;
};

// Ordered grapheme -> phoneme map. A grapheme must be listed before any of
// its own prefixes (e.g. "ch" before "c") so first match is longest match.
class G2PTable {
 public:
  void add(std::string grapheme, const Phoneme& phoneme);
  // TSV columns: grapheme, phoneme, freq_hz, dur_ms, voiced (1/0).
  static G2PTable load(const std::filesystem::path& path);

  struct Unit {
    std::string grapheme;
    const Phoneme* phoneme;  // nullptr for an unmapped character
  };
  std::vector<Unit> segment(std::string_view word) const;
  std::size_t size() const { return graphemes_.size(); }
  const Phoneme* phoneme(const std::string& id) const;

 private:
  std::vector<std::pair<std::string, std::string>> graphemes_;
  std::unordered_map<std::string, Phoneme> phonemes_;
};

struct TtsConfig {
  int word_gap_ms = 50;
  int unknown_ms = 30;      // silence for an unmapped grapheme
  double peak = 0.5;        // amplitude ceiling, fraction of full scale
};

struct TtsResult {
  AudioBuffer audio;
  std::vector<std::string> unknown_graphemes;
};

// Deterministic stand-in for a neural TTS: one windowed tone (voiced) or
// windowed seeded noise (voiceless) per phoneme, silence between words.
TtsResult pseudo_tts(std::string_view text, const G2PTable& g2p, std::uint64_t seed,
                     const TtsConfig& cfg = {});

// Sends one tts request and returns the canonical WAV the adapter wrote.
AudioBuffer external_tts(ExternalProcessClient& client, std::string_view text,
                         const std::filesystem::path& out_path);

}  // namespace qaug::audio

#endif  // QAUG_AUDIO_HPP_
