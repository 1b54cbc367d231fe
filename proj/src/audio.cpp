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

#include "qaug/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>

#include <nlohmann/json.hpp>

#include "qaug/morph.hpp"
#include "qaug/random.hpp"
#include "qaug/text_io.hpp"

namespace qaug::audio {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t le16(std::string_view b, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                    (static_cast<unsigned char>(b[off + 1]) << 8));
}

std::uint32_t le32(std::string_view b, std::size_t off) {
  return static_cast<std::uint32_t>(le16(b, off)) | (static_cast<std::uint32_t>(le16(b, off + 2)) << 16);
}

void put16(std::string& out, std::uint16_t v) {
  out += static_cast<char>(v & 0xFF);
  out += static_cast<char>(v >> 8);
}

void put32(std::string& out, std::uint32_t v) {
  put16(out, static_cast<std::uint16_t>(v & 0xFFFF));
  put16(out, static_cast<std::uint16_t>(v >> 16));
}

struct Parsed {
  WavFormat format;
  std::uint16_t block_align = 0;
  std::string_view data;
};

Parsed parse_riff(std::string_view b) {
  if (b.size() < 12 || b.substr(0, 4) != "RIFF" || b.substr(8, 4) != "WAVE")
    throw NotWav("missing RIFF/WAVE header");
  Parsed p;
  bool have_fmt = false, have_data = false;
  std::size_t off = 12;
  while (off + 8 <= b.size()) {
    auto id = b.substr(off, 4);
    std::uint32_t size = le32(b, off + 4);
    std::size_t body = off + 8;
    if (body + size > b.size()) {
      // Tolerate a data chunk whose declared size overruns a truncated file.
      if (id != "data") throw NotWav("chunk '" + std::string(id) + "' overruns file");
      size = static_cast<std::uint32_t>(b.size() - body);
    }
    if (id == "fmt ") {
      if (size < 16) throw NotWav("fmt chunk too short");
      p.format.format_tag = le16(b, body);
      p.format.channels = le16(b, body + 2);
      p.format.sample_rate = le32(b, body + 4);
      p.block_align = le16(b, body + 12);
      p.format.bits_per_sample = le16(b, body + 14);
      if (p.format.format_tag == kFormatExtensible && size >= 40) p.format.format_tag = le16(b, body + 24);
      have_fmt = true;
    } else if (id == "data") {
      p.data = b.substr(body, size);
      have_data = true;
    }
    off = body + size + (size & 1);
  }
  if (!have_fmt) throw NotWav("no fmt chunk");
  if (!have_data) throw NotWav("no data chunk");
  if (p.format.channels == 0) throw UnsupportedEncoding("zero channels");
  if (p.format.sample_rate == 0) throw UnsupportedEncoding("zero sample rate");
  return p;
}

std::int16_t clamp16(double v) {
  v = std::round(v);  // half away from zero
  return static_cast<std::int16_t>(std::clamp(v, -32768.0, 32767.0));
}

// Linear interpolation at a fractional position, clamped to the last sample.
double interp(std::span<const std::int16_t> s, double pos) {
  const auto last = s.size() - 1;
  if (pos >= static_cast<double>(last)) return s[last];
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return s[i] + (static_cast<double>(s[i + 1]) - s[i]) * frac;
}

}  // namespace

std::string WavFormat::describe() const {
  std::string tag = format_tag == kFormatPcm ? "PCM" : format_tag == kFormatFloat ? "float" :
                                                                                    "format " + std::to_string(format_tag);
  return tag + ", " + std::to_string(channels) + " ch, " + std::to_string(sample_rate) + " Hz, " +
         std::to_string(bits_per_sample) + "-bit";
}

std::size_t round_length(double x) { return static_cast<std::size_t>(std::round(x)); }

std::string encode_wav(const AudioBuffer& buffer) {
  const auto data_bytes = static_cast<std::uint32_t>(buffer.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put32(out, 16);
  put16(out, kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate));
  put32(out, static_cast<std::uint32_t>(buffer.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out += "data";
  put32(out, data_bytes);
  for (auto s : buffer.samples) put16(out, static_cast<std::uint16_t>(s));
  return out;
}

AudioBuffer decode_wav_strict(std::string_view bytes) {
  auto p = parse_riff(bytes);
  if (!p.format.canonical())
    throw UnsupportedEncoding("expected PCM, 1 ch, 16000 Hz, 16-bit; got " + p.format.describe());
  AudioBuffer out;
  out.sample_rate = kCanonicalRate;
  out.samples.resize(p.data.size() / 2);
  for (std::size_t i = 0; i < out.samples.size(); ++i)
    out.samples[i] = static_cast<std::int16_t>(le16(p.data, 2 * i));
  return out;
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  write_file(path, encode_wav(buffer));
}

AudioBuffer read_wav_strict(const std::filesystem::path& path) {
  return decode_wav_strict(read_file(path));
}

AnyWav decode_wav_any(std::string_view bytes) {
  auto p = parse_riff(bytes);
  const auto& f = p.format;
  const bool pcm = f.format_tag == kFormatPcm &&
                   (f.bits_per_sample == 8 || f.bits_per_sample == 16 || f.bits_per_sample == 24 ||
                    f.bits_per_sample == 32);
  const bool flt = f.format_tag == kFormatFloat && f.bits_per_sample == 32;
  if (!pcm && !flt) throw UnsupportedEncoding("cannot decode " + f.describe());
  const std::size_t width = f.bits_per_sample / 8;
  const std::size_t frame = width * f.channels;
  const std::size_t frames = p.data.size() / frame;

  auto sample_at = [&](std::size_t off) -> double {  // scaled to the int16 range
    const auto* d = reinterpret_cast<const unsigned char*>(p.data.data()) + off;
    if (flt) {
      std::uint32_t bits = static_cast<std::uint32_t>(d[0]) | (static_cast<std::uint32_t>(d[1]) << 8) |
                           (static_cast<std::uint32_t>(d[2]) << 16) | (static_cast<std::uint32_t>(d[3]) << 24);
      float v;
      std::memcpy(&v, &bits, sizeof v);
      return static_cast<double>(v) * 32767.0;
    }
    switch (width) {
      case 1: return (static_cast<double>(d[0]) - 128.0) * 256.0;
      case 2: return static_cast<std::int16_t>(d[0] | (d[1] << 8));
      case 3: {
        std::int32_t v = d[0] | (d[1] << 8) | (d[2] << 16);
        if (v & 0x800000) v |= ~0xFFFFFF;
        return static_cast<double>(v) / 256.0;
      }
      default: {
        std::uint32_t u = static_cast<std::uint32_t>(d[0]) | (static_cast<std::uint32_t>(d[1]) << 8) |
                          (static_cast<std::uint32_t>(d[2]) << 16) | (static_cast<std::uint32_t>(d[3]) << 24);
        return static_cast<double>(static_cast<std::int32_t>(u)) / 65536.0;
      }
    }
  };

  AnyWav out;
  out.format = f;
  out.mono.sample_rate = static_cast<int>(f.sample_rate);
  out.mono.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0;
    for (std::size_t c = 0; c < f.channels; ++c) acc += sample_at(i * frame + c * width);
    out.mono.samples[i] = clamp16(acc / f.channels);
  }
  return out;
}

AnyWav read_wav_any(const std::filesystem::path& path) { return decode_wav_any(read_file(path)); }

AudioBuffer normalize_format(const AudioBuffer& buffer) {
  if (buffer.sample_rate <= 0) throw InvalidArgument("sample rate must be positive");
  if (buffer.sample_rate == kCanonicalRate) return buffer;
  AudioBuffer out;
  out.sample_rate = kCanonicalRate;
  if (buffer.samples.empty()) return out;
  const double step = static_cast<double>(buffer.sample_rate) / kCanonicalRate;
  const auto n = round_length(static_cast<double>(buffer.samples.size()) * kCanonicalRate / buffer.sample_rate);
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = clamp16(interp(buffer.samples, static_cast<double>(i) * step));
  return out;
}

AudioBuffer speed_perturb(const AudioBuffer& buffer, double factor) {
  if (!(factor >= 0.5 && factor <= 2.0)) throw FactorOutOfRange(factor);
  if (factor == 1.0) return buffer;
  AudioBuffer out;
  out.sample_rate = buffer.sample_rate;
  if (buffer.samples.empty()) return out;
  const auto n = round_length(static_cast<double>(buffer.samples.size()) / factor);
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = clamp16(interp(buffer.samples, static_cast<double>(i) * factor));
  return out;
}

double sample_speed_factor(std::uint64_t seed, std::string_view item_id, double lo, double hi) {
  Rng rng(derive_seed(seed, item_id));
  return lo + (hi - lo) * rng.uniform();
}

void G2PTable::add(std::string grapheme, const Phoneme& phoneme) {
  for (const auto& [g, _] : graphemes_)
    if (g == grapheme) throw InvalidArgument("duplicate grapheme '" + grapheme + "'");
  for (const auto& [g, _] : graphemes_)
    if (grapheme.size() > g.size() && grapheme.starts_with(g))
      throw InvalidArgument("grapheme '" + grapheme + "' must be listed before its prefix '" + g + "'");
  auto [it, inserted] = phonemes_.try_emplace(phoneme.id, phoneme);
  if (!inserted && (it->second.freq_hz != phoneme.freq_hz || it->second.dur_ms != phoneme.dur_ms ||
                    it->second.voiced != phoneme.voiced))
    throw InvalidArgument("phoneme '" + phoneme.id + "' given conflicting parameters");
  graphemes_.emplace_back(std::move(grapheme), phoneme.id);
}

G2PTable G2PTable::load(const std::filesystem::path& path) {
  G2PTable t;
  for (const auto& row : read_tsv(path, "grapheme")) {
    if (row.fields.size() < 5)
      throw ParseError(path.string(), row.line, "expected grapheme, phoneme, freq_hz, dur_ms, voiced");
    try {
      Phoneme p{row.fields[1], std::stod(row.fields[2]), std::stoi(row.fields[3]), row.fields[4] == "1"};
      if (p.dur_ms <= 0 || p.freq_hz < 0) throw InvalidArgument("bad phoneme parameters");
      t.add(utf8_lower(row.fields[0]), p);
    } catch (const std::logic_error& e) {
      throw ParseError(path.string(), row.line, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(path.string(), row.line, e.what());
    }
  }
  return t;
}

const Phoneme* G2PTable::phoneme(const std::string& id) const {
  auto it = phonemes_.find(id);
  return it == phonemes_.end() ? nullptr : &it->second;
}

std::vector<G2PTable::Unit> G2PTable::segment(std::string_view word) const {
  std::vector<Unit> out;
  std::size_t i = 0;
  while (i < word.size()) {
    const std::pair<std::string, std::string>* hit = nullptr;
    for (const auto& entry : graphemes_) {
      if (word.substr(i).starts_with(entry.first)) {
        hit = &entry;
        break;
      }
    }
    if (hit) {
      out.push_back({hit->first, &phonemes_.at(hit->second)});
      i += hit->first.size();
    } else {
      auto ch = utf8_chars(word.substr(i)).front();
      out.push_back({ch, nullptr});
      i += ch.size();
    }
  }
  return out;
}

TtsResult pseudo_tts(std::string_view text, const G2PTable& g2p, std::uint64_t seed, const TtsConfig& cfg) {
  TtsResult res;
  auto& samples = res.audio.samples;
  res.audio.sample_rate = kCanonicalRate;
  const auto per_ms = static_cast<std::size_t>(kCanonicalRate / 1000);
  const double amp = cfg.peak * 32767.0;
  std::size_t unit_index = 0;

  auto words = morph::tokenize(text);
  for (std::size_t w = 0; w < words.size(); ++w) {
    if (w) samples.insert(samples.end(), static_cast<std::size_t>(cfg.word_gap_ms) * per_ms, 0);
    for (const auto& unit : g2p.segment(words[w])) {
      ++unit_index;
      if (!unit.phoneme) {
        res.unknown_graphemes.push_back(unit.grapheme);
        samples.insert(samples.end(), static_cast<std::size_t>(cfg.unknown_ms) * per_ms, 0);
        continue;
      }
      const auto& ph = *unit.phoneme;
      const std::size_t n = static_cast<std::size_t>(ph.dur_ms) * per_ms;
      Rng rng(derive_seed(seed, unit_index));
      for (std::size_t i = 0; i < n; ++i) {
        const double window = n > 1 ? 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                             static_cast<double>(n - 1)))
                                    : 0.0;
        double v = 0;
        if (ph.freq_hz > 0) {
          v = ph.voiced ? std::sin(2.0 * std::numbers::pi * ph.freq_hz * static_cast<double>(i) / kCanonicalRate)
                        : 2.0 * rng.uniform() - 1.0;
        }
        samples.push_back(clamp16(amp * window * v));
      }
    }
  }
  return res;
}

AudioBuffer external_tts(ExternalProcessClient& client, std::string_view text,
                         const std::filesystem::path& out_path) {
  using json = nlohmann::json;
  json req;
  req["cmd"] = "tts";
  req["text"] = std::string(text);
  req["out"] = out_path.string();
  client.send_line(req.dump());
  auto line = client.read_line();
  if (!line) throw ProtocolError(1, "adapter closed its output without a response");
  json msg;
  try {
    msg = json::parse(*line);
  } catch (const json::exception&) {
    throw ProtocolError(1, "not JSON: " + *line);
  }
  if (!msg.is_object() || !msg.contains("ok") || !msg["ok"].is_boolean())
    throw ProtocolError(1, "missing boolean 'ok': " + *line);
  if (!msg["ok"].get<bool>())
    throw ProtocolError(1, "adapter reported failure: " + msg.value("error", std::string("unknown")));
  std::filesystem::path produced = out_path;
  if (auto it = msg.find("out"); it != msg.end() && it->is_string()) produced = it->get<std::string>();
  try {
    return read_wav_strict(produced);
  } catch (const UnsupportedEncoding& e) {
    throw NonCanonicalAudio(produced.string() + ": " + e.what());
  } catch (const NotWav& e) {
    throw NonCanonicalAudio(produced.string() + ": " + e.what());
  }
}

}  // namespace qaug::audio
