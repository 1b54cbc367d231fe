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

#ifndef QAUG_FEATURES_HPP_
#define QAUG_FEATURES_HPP_

#include <complex>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "qaug/audio.hpp"

namespace qaug::features {

struct FeatureConfig {
  int win_ms = 25;
  int hop_ms = 10;
  int n_mfcc = 13;
  int fft_size = 512;  // 257 power-spectrum components
  int mel_filters = 26;
  int sample_rate = audio::kCanonicalRate;
  bool deltas = true;
  double log_floor = 1e-10;

  int win_samples() const { return win_ms * sample_rate / 1000; }
  int hop_samples() const { return hop_ms * sample_rate / 1000; }
  int n_bins() const { return fft_size / 2 + 1; }
  void validate() const;
};

// Row-major frames x dims matrix.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;
  std::vector<std::string> labels;  // one per column

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}
  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
};

std::size_t frame_count(std::size_t n_samples, const FeatureConfig& cfg = {});

// In-place iterative radix-2 FFT. Size must be a power of two.
void fft(std::vector<std::complex<double>>& x);

// Samples scaled to [-1, 1) (divide by 32768). Per frame: Hamming window,
// zero pad to fft_size, |X_k|^2 for k = 0..fft_size/2.
FeatureMatrix power_spectrum(const audio::AudioBuffer& buffer, const FeatureConfig& cfg = {});

// Hamming window of length n: 0.54 - 0.46 cos(2 pi i / (n - 1)).
std::vector<double> hamming(std::size_t n);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// mel_filters x n_bins triangular filters, HTK mel scale, 0 Hz to Nyquist.
std::vector<std::vector<double>> mel_filterbank(const FeatureConfig& cfg = {});

// n x n orthonormal DCT-II matrix; row j is basis vector j.
std::vector<std::vector<double>> dct_matrix(std::size_t n);

// 13 cepstra per frame; 39 with deltas when cfg.deltas.
FeatureMatrix mfcc(const audio::AudioBuffer& buffer, const FeatureConfig& cfg = {});

// Appends first and second order regression deltas (window 2, edge frames
// replicated).
FeatureMatrix deltas(const FeatureMatrix& m);

// Per column: subtract the mean, divide by the population standard deviation
// (columns with std < 1e-12 are only centered).
FeatureMatrix normalize_sequence(const FeatureMatrix& m);

// Binary dump: ASCII header lines "QAUGFEAT 1", "rows R", "cols C",
// "labels a,b,...", "end", then rows*cols little-endian float64 values
// in row-major order.
std::string encode_dump(const FeatureMatrix& m);
FeatureMatrix decode_dump(std::string_view bytes);
std::string to_csv(const FeatureMatrix& m);

// 34 grapheme symbols used as ASR output units.
struct GraphemeVocab {
  std::vector<std::string> symbols;

  static GraphemeVocab default_vocab();
  static GraphemeVocab load(const std::filesystem::path& path);  // one symbol per line
  void validate() const;
  bool contains(std::string_view s) const;
};

inline constexpr std::size_t kGraphemeCount = 34;
inline constexpr std::string_view kSilenceSymbol = "|";

}  // namespace qaug::features

#endif  // QAUG_FEATURES_HPP_
