// Copyright 2026 The emorec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "emorec/wav.hpp"

namespace emorec {

// Row-major real matrix used for frame-level features.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const {
    return std::span<const double>(values).subspan(r * cols, cols);
  }
};

struct MfccConfig {
  std::size_t n_mfcc = 32;
  std::size_t frame_length = 400;  // 25 ms at 16 kHz
  std::size_t hop_length = 160;    // 10 ms
  std::size_t fft_size = 512;
  std::size_t n_mels = 64;
  double fmin = 0.0;
  double fmax = 8000.0;
  int delta_window = 2;

  void validate() const;
  // n_mfcc static coefficients plus first and second order deltas.
  std::size_t feature_dim() const { return 3 * n_mfcc; }
};

inline constexpr double kLogMelFloor = 1e-10;

// In-place iterative radix-2 FFT; data.size() must be a power of two.
void fft(std::vector<std::complex<double>>& data);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters on the 2595 * log10(1 + f / 700) mel scale with peak
// weight 1, applied to a power spectrum of fft_size / 2 + 1 bins.
class MelFilterbank {
 public:
  MelFilterbank(std::size_t n_mels, std::size_t fft_size, int sample_rate,
                double fmin, double fmax);

  std::vector<double> apply(std::span<const double> power) const;
  double center_hz(std::size_t filter) const { return edges_hz_[filter + 1]; }
  std::size_t size() const { return n_mels_; }
  double weight(std::size_t filter, std::size_t bin) const {
    return weights_[filter * n_bins_ + bin];
  }

 private:
  std::size_t n_mels_;
  std::size_t n_bins_;
  std::vector<double> edges_hz_;
  std::vector<double> weights_;
};

std::size_t num_frames(std::size_t num_samples, const MfccConfig& cfg);

// Periodic Hamming window of the given length.
std::vector<double> hamming_window(std::size_t length);

// Power spectrum |X_k|^2, k = 0..fft_size/2, of one windowed, zero-padded frame.
std::vector<double> power_spectrum(std::span<const double> frame,
                                   std::size_t fft_size);

// Mel filterbank energies per frame (N x n_mels, before the log).
FeatureMatrix mel_energies(const WaveformBuffer& wave, const MfccConfig& cfg);

// Orthonormal DCT-II rows 0..n_out-1 applied to a length-n input.
std::vector<double> dct_ii_orthonormal(std::span<const double> input,
                                       std::size_t n_out);

// Static MFCCs (N x n_mfcc), coefficient 0 included.
FeatureMatrix compute_mfcc(const WaveformBuffer& wave, const MfccConfig& cfg);

// Regression deltas with edge frames replicated:
//   d_t = sum_{n=1..W} n (c_{t+n} - c_{t-n}) / (2 sum_{n=1..W} n^2)
FeatureMatrix delta(const FeatureMatrix& c, int window);

// MFCC || delta || delta-delta, N x 3 n_mfcc.
FeatureMatrix compute_features(const WaveformBuffer& wave, const MfccConfig& cfg);

struct PaddedFeatures {
  FeatureMatrix matrix;
  std::size_t valid_len = 0;
};

// Frame count of a clip lasting `seconds` at 16 kHz.
std::size_t max_frames_for_seconds(double seconds, const MfccConfig& cfg);

// Zero-pads or truncates to exactly max_frames rows.
PaddedFeatures pad_or_truncate_audio(const FeatureMatrix& m,
                                     std::size_t max_frames);

}  // namespace emorec
