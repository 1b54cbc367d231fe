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

#include "qaug/features.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>

#include "qaug/error.hpp"
#include "qaug/text_io.hpp"

namespace qaug::features {

void FeatureConfig::validate() const {
  if (!(win_ms > hop_ms && hop_ms > 0)) throw InvalidArgument("need win_ms > hop_ms > 0");
  if (fft_size <= 0 || !std::has_single_bit(static_cast<unsigned>(fft_size)))
    throw InvalidArgument("fft_size must be a power of two");
  if (win_samples() > fft_size) throw InvalidArgument("window longer than fft_size");
  if (n_mfcc < 1 || n_mfcc > mel_filters) throw InvalidArgument("need 1 <= n_mfcc <= mel_filters");
  if (sample_rate <= 0) throw InvalidArgument("sample_rate must be positive");
}

std::size_t frame_count(std::size_t n_samples, const FeatureConfig& cfg) {
  const auto win = static_cast<std::size_t>(cfg.win_samples());
  const auto hop = static_cast<std::size_t>(cfg.hop_samples());
  if (n_samples < win) return 0;
  return 1 + (n_samples - win) / hop;
}

void fft(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || !std::has_single_bit(n)) throw InvalidArgument("fft size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> w = std::polar(1.0, ang * static_cast<double>(k));
        auto u = x[i + k];
        auto v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
      }
    }
  }
}

std::vector<double> hamming(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1));
  return w;
}

FeatureMatrix power_spectrum(const audio::AudioBuffer& buffer, const FeatureConfig& cfg) {
  cfg.validate();
  const auto win = static_cast<std::size_t>(cfg.win_samples());
  const auto hop = static_cast<std::size_t>(cfg.hop_samples());
  const auto nfft = static_cast<std::size_t>(cfg.fft_size);
  const auto bins = static_cast<std::size_t>(cfg.n_bins());
  const auto frames = frame_count(buffer.samples.size(), cfg);
  const auto window = hamming(win);

  FeatureMatrix out(frames, bins);
  for (std::size_t k = 0; k < bins; ++k) out.labels.push_back("pow" + std::to_string(k));
  std::vector<std::complex<double>> x(nfft);
  for (std::size_t f = 0; f < frames; ++f) {
    std::fill(x.begin(), x.end(), 0.0);
    for (std::size_t i = 0; i < win; ++i) x[i] = buffer.samples[f * hop + i] / 32768.0 * window[i];
    fft(x);
    for (std::size_t k = 0; k < bins; ++k) out.at(f, k) = std::norm(x[k]);
  }
  return out;
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::vector<std::vector<double>> mel_filterbank(const FeatureConfig& cfg) {
  const auto m = static_cast<std::size_t>(cfg.mel_filters);
  const auto bins = static_cast<std::size_t>(cfg.n_bins());
  const double top = hz_to_mel(cfg.sample_rate / 2.0);
  std::vector<double> edges(m + 2);
  for (std::size_t i = 0; i < m + 2; ++i) edges[i] = mel_to_hz(top * static_cast<double>(i) / static_cast<double>(m + 1));

  std::vector<std::vector<double>> fb(m, std::vector<double>(bins, 0.0));
  for (std::size_t j = 0; j < m; ++j) {
    const double lo = edges[j], mid = edges[j + 1], hi = edges[j + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      if (f >= lo && f <= mid) {
        fb[j][k] = (f - lo) / (mid - lo);
      } else if (f > mid && f <= hi) {
        fb[j][k] = (hi - f) / (hi - mid);
      }
    }
  }
  return fb;
}

std::vector<std::vector<double>> dct_matrix(std::size_t n) {
  std::vector<std::vector<double>> d(n, std::vector<double>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const double scale = std::sqrt((j == 0 ? 1.0 : 2.0) / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i)
      d[j][i] = scale * std::cos(std::numbers::pi * static_cast<double>(j) * (static_cast<double>(i) + 0.5) /
                                 static_cast<double>(n));
  }
  return d;
}

FeatureMatrix mfcc(const audio::AudioBuffer& buffer, const FeatureConfig& cfg) {
  const auto power = power_spectrum(buffer, cfg);
  const auto fb = mel_filterbank(cfg);
  const auto dct = dct_matrix(fb.size());
  const auto nc = static_cast<std::size_t>(cfg.n_mfcc);

  FeatureMatrix out(power.rows, nc);
  for (std::size_t c = 0; c < nc; ++c) out.labels.push_back("c" + std::to_string(c));
  std::vector<double> logmel(fb.size());
  for (std::size_t f = 0; f < power.rows; ++f) {
    auto p = power.row(f);
    for (std::size_t j = 0; j < fb.size(); ++j) {
      double e = 0;
      for (std::size_t k = 0; k < p.size(); ++k) e += fb[j][k] * p[k];
      logmel[j] = std::log(std::max(e, cfg.log_floor));
    }
    for (std::size_t c = 0; c < nc; ++c) {
      double acc = 0;
      for (std::size_t j = 0; j < fb.size(); ++j) acc += dct[c][j] * logmel[j];
      out.at(f, c) = acc;
    }
  }
  return cfg.deltas ? deltas(out) : out;
}

namespace {

FeatureMatrix regression(const FeatureMatrix& m) {
  FeatureMatrix d(m.rows, m.cols);
  if (m.rows == 0) return d;
  const auto last = static_cast<long>(m.rows) - 1;
  auto at = [&](long t, std::size_t c) { return m.at(static_cast<std::size_t>(std::clamp(t, 0L, last)), c); };
  constexpr double kNorm = 2.0 * (1.0 + 4.0);
  for (long t = 0; t <= last; ++t)
    for (std::size_t c = 0; c < m.cols; ++c)
      d.at(static_cast<std::size_t>(t), c) =
          (1.0 * (at(t + 1, c) - at(t - 1, c)) + 2.0 * (at(t + 2, c) - at(t - 2, c))) / kNorm;
  return d;
}

}  // namespace

FeatureMatrix deltas(const FeatureMatrix& m) {
  if (m.rows == 0) throw InvalidArgument("deltas: need at least one frame");
  const auto d1 = regression(m);
  const auto d2 = regression(d1);
  FeatureMatrix out(m.rows, m.cols * 3);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) {
      out.at(r, c) = m.at(r, c);
      out.at(r, m.cols + c) = d1.at(r, c);
      out.at(r, 2 * m.cols + c) = d2.at(r, c);
    }
  for (const char* prefix : {"", "d_", "dd_"})
    for (std::size_t c = 0; c < m.cols; ++c)
      out.labels.push_back(prefix + (c < m.labels.size() ? m.labels[c] : "x" + std::to_string(c)));
  return out;
}

FeatureMatrix normalize_sequence(const FeatureMatrix& m) {
  if (m.rows == 0) throw InvalidArgument("normalize_sequence: need at least one frame");
  FeatureMatrix out = m;
  const auto n = static_cast<double>(m.rows);
  for (std::size_t c = 0; c < m.cols; ++c) {
    double mean = 0;
    for (std::size_t r = 0; r < m.rows; ++r) mean += m.at(r, c);
    mean /= n;
    double var = 0;
    for (std::size_t r = 0; r < m.rows; ++r) var += (m.at(r, c) - mean) * (m.at(r, c) - mean);
    const double sd = std::sqrt(var / n);
    for (std::size_t r = 0; r < m.rows; ++r) {
      double v = m.at(r, c) - mean;
      out.at(r, c) = sd < 1e-12 ? v : v / sd;
    }
  }
  return out;
}

std::string encode_dump(const FeatureMatrix& m) {
  std::string out = "QAUGFEAT 1\nrows " + std::to_string(m.rows) + "\ncols " + std::to_string(m.cols) +
                    "\nlabels " + join(m.labels, ",") + "\nend\n";
  static_assert(std::endian::native == std::endian::little, "dump writer assumes little endian");
  out.append(reinterpret_cast<const char*>(m.data.data()), m.data.size() * sizeof(double));
  return out;
}

FeatureMatrix decode_dump(std::string_view bytes) {
  FeatureMatrix m;
  std::size_t pos = 0;
  auto next_line = [&]() {
    auto nl = bytes.find('\n', pos);
    if (nl == std::string_view::npos) throw ParseError("feature dump", 0, "truncated header");
    auto line = bytes.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  };
  if (next_line() != "QAUGFEAT 1") throw ParseError("feature dump", 1, "bad magic");
  auto rows = next_line();
  auto cols = next_line();
  auto labels = next_line();
  if (!rows.starts_with("rows ") || !cols.starts_with("cols ") || !labels.starts_with("labels ") ||
      next_line() != "end")
    throw ParseError("feature dump", 0, "malformed header");
  m.rows = std::stoul(std::string(rows.substr(5)));
  m.cols = std::stoul(std::string(cols.substr(5)));
  auto lab = labels.substr(7);
  if (!lab.empty()) m.labels = split(lab, ',');
  const std::size_t need = m.rows * m.cols * sizeof(double);
  if (bytes.size() - pos != need) throw ParseError("feature dump", 0, "payload size mismatch");
  m.data.resize(m.rows * m.cols);
  std::memcpy(m.data.data(), bytes.data() + pos, need);
  return m;
}

std::string to_csv(const FeatureMatrix& m) {
  std::string out = join(m.labels, ",") + "\n";
  char buf[32];
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      std::snprintf(buf, sizeof buf, "%.9g", m.at(r, c));
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

GraphemeVocab GraphemeVocab::default_vocab() {
  GraphemeVocab v;
  for (char c = 'a'; c <= 'z'; ++c) {
    v.symbols.emplace_back(1, c);
    if (c == 'n') v.symbols.emplace_back("\xC3\xB1");  // ñ
  }
  for (const char* accented : {"\xC3\xA1", "\xC3\xA9", "\xC3\xAD", "\xC3\xB3", "\xC3\xBA"})  // á é í ó ú
    v.symbols.emplace_back(accented);
  v.symbols.emplace_back("'");
  v.symbols.emplace_back(kSilenceSymbol);
  return v;
}

GraphemeVocab GraphemeVocab::load(const std::filesystem::path& path) {
  GraphemeVocab v;
  for (const auto& line : read_lines(path)) {
    auto s = trim(line);
    if (!s.empty() && !s.starts_with('#')) v.symbols.emplace_back(s);
  }
  v.validate();
  return v;
}

void GraphemeVocab::validate() const {
  if (symbols.size() != kGraphemeCount)
    throw InvalidArgument("grapheme vocabulary must have 34 symbols, has " + std::to_string(symbols.size()));
  if (!contains("'")) throw InvalidArgument("grapheme vocabulary lacks the apostrophe");
  if (!contains(kSilenceSymbol)) throw InvalidArgument("grapheme vocabulary lacks the silence symbol");
  for (std::size_t i = 0; i < symbols.size(); ++i)
    for (std::size_t j = i + 1; j < symbols.size(); ++j)
      if (symbols[i] == symbols[j]) throw InvalidArgument("duplicate grapheme '" + symbols[i] + "'");
}

bool GraphemeVocab::contains(std::string_view s) const {
  return std::find(symbols.begin(), symbols.end(), s) != symbols.end();
}

}  // namespace qaug::features
