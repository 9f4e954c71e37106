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

#include "emorec/mfcc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "emorec/error.hpp"

namespace emorec {

void MfccConfig::validate() const {
  if (n_mfcc == 0 || n_mfcc > n_mels) {
    throw ValidationError("mfcc: n_mfcc must be in [1, n_mels], got " +
                          std::to_string(n_mfcc));
  }
  if (frame_length == 0 || hop_length == 0) {
    throw ValidationError("mfcc: frame_length and hop_length must be positive");
  }
  if (fft_size < frame_length || (fft_size & (fft_size - 1)) != 0) {
    throw ValidationError("mfcc: fft_size " + std::to_string(fft_size) +
                          " must be a power of two >= frame_length");
  }
  if (!(fmin >= 0.0 && fmax > fmin && fmax <= kSampleRate / 2.0)) {
    throw ValidationError("mfcc: need 0 <= fmin < fmax <= Nyquist");
  }
  if (delta_window < 1) {
    throw ValidationError("mfcc: delta_window must be >= 1");
  }
}

void fft(std::vector<std::complex<double>>& data) {
  const std::size_t n = data.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw ValidationError("fft: size " + std::to_string(n) +
                          " is not a power of two");
  }
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(data[i], data[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::size_t half = len / 2;
    for (std::size_t k = 0; k < half; ++k) {
      // Twiddles are evaluated directly rather than by recurrence to keep
      // rounding error flat in the transform size.
      const std::complex<double> w(std::cos(angle * static_cast<double>(k)),
                                   std::sin(angle * static_cast<double>(k)));
      for (std::size_t start = 0; start < n; start += len) {
        const std::complex<double> u = data[start + k];
        const std::complex<double> v = data[start + k + half] * w;
        data[start + k] = u + v;
        data[start + k + half] = u - v;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MelFilterbank::MelFilterbank(std::size_t n_mels, std::size_t fft_size,
                             int sample_rate, double fmin, double fmax)
    : n_mels_(n_mels), n_bins_(fft_size / 2 + 1) {
  const double mel_lo = hz_to_mel(fmin), mel_hi = hz_to_mel(fmax);
  edges_hz_.resize(n_mels + 2);
  for (std::size_t i = 0; i < edges_hz_.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) /
                                    static_cast<double>(n_mels + 1);
    edges_hz_[i] = mel_to_hz(mel);
  }
  weights_.assign(n_mels * n_bins_, 0.0);
  const double bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
  for (std::size_t m = 0; m < n_mels; ++m) {
    const double left = edges_hz_[m], center = edges_hz_[m + 1],
                 right = edges_hz_[m + 2];
    for (std::size_t k = 0; k < n_bins_; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      weights_[m * n_bins_ + k] = std::max(0.0, std::min(up, down));
    }
  }
}

std::vector<double> MelFilterbank::apply(std::span<const double> power) const {
  if (power.size() != n_bins_) {
    throw ValidationError("mel filterbank expects " + std::to_string(n_bins_) +
                          " bins, got " + std::to_string(power.size()));
  }
  std::vector<double> out(n_mels_, 0.0);
  for (std::size_t m = 0; m < n_mels_; ++m) {
    const double* w = &weights_[m * n_bins_];
    double acc = 0.0;
    for (std::size_t k = 0; k < n_bins_; ++k) acc += w[k] * power[k];
    out[m] = acc;
  }
  return out;
}

std::size_t num_frames(std::size_t num_samples, const MfccConfig& cfg) {
  if (num_samples < cfg.frame_length) return 0;
  return 1 + (num_samples - cfg.frame_length) / cfg.hop_length;
}

std::vector<double> hamming_window(std::size_t length) {
  std::vector<double> w(length);
  for (std::size_t n = 0; n < length; ++n) {
    w[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                  static_cast<double>(length));
  }
  return w;
}

std::vector<double> power_spectrum(std::span<const double> frame,
                                   std::size_t fft_size) {
  if (frame.size() > fft_size) {
    throw ValidationError("power_spectrum: frame longer than fft_size");
  }
  std::vector<std::complex<double>> buf(fft_size);
  for (std::size_t i = 0; i < frame.size(); ++i) buf[i] = frame[i];
  fft(buf);
  std::vector<double> power(fft_size / 2 + 1);
  for (std::size_t k = 0; k < power.size(); ++k) power[k] = std::norm(buf[k]);
  return power;
}

FeatureMatrix mel_energies(const WaveformBuffer& wave, const MfccConfig& cfg) {
  cfg.validate();
  if (wave.sample_rate != kSampleRate) {
    throw ValidationError("sample_rate " + std::to_string(wave.sample_rate) +
                          " is not " + std::to_string(kSampleRate));
  }
  const std::size_t n = num_frames(wave.samples.size(), cfg);
  if (n == 0) {
    throw ValidationError("signal of " + std::to_string(wave.samples.size()) +
                          " samples is shorter than one frame (" +
                          std::to_string(cfg.frame_length) + ")");
  }
  const MelFilterbank bank(cfg.n_mels, cfg.fft_size, wave.sample_rate, cfg.fmin,
                           cfg.fmax);
  const std::vector<double> window = hamming_window(cfg.frame_length);
  FeatureMatrix out(n, cfg.n_mels);
  std::vector<double> frame(cfg.frame_length);
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t start = t * cfg.hop_length;
    for (std::size_t i = 0; i < cfg.frame_length; ++i)
      frame[i] = static_cast<double>(wave.samples[start + i]) * window[i];
    const std::vector<double> mel = bank.apply(power_spectrum(frame, cfg.fft_size));
    std::copy(mel.begin(), mel.end(), out.values.begin() +
                                          static_cast<std::ptrdiff_t>(t * cfg.n_mels));
  }
  return out;
}

std::vector<double> dct_ii_orthonormal(std::span<const double> input,
                                       std::size_t n_out) {
  const std::size_t n = input.size();
  std::vector<double> out(n_out, 0.0);
  const double nd = static_cast<double>(n);
  for (std::size_t k = 0; k < n_out; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += input[i] * std::cos(std::numbers::pi * static_cast<double>(k) *
                                 (2.0 * static_cast<double>(i) + 1.0) / (2.0 * nd));
    }
    out[k] = acc * (k == 0 ? std::sqrt(1.0 / nd) : std::sqrt(2.0 / nd));
  }
  return out;
}

FeatureMatrix compute_mfcc(const WaveformBuffer& wave, const MfccConfig& cfg) {
  const FeatureMatrix mel = mel_energies(wave, cfg);
  FeatureMatrix out(mel.rows, cfg.n_mfcc);
  // DCT basis rows, obtained by transforming unit vectors.
  FeatureMatrix basis(cfg.n_mels, cfg.n_mfcc);
  std::vector<double> unit(cfg.n_mels, 0.0);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    unit[m] = 1.0;
    const std::vector<double> col = dct_ii_orthonormal(unit, cfg.n_mfcc);
    std::copy(col.begin(), col.end(),
              basis.values.begin() + static_cast<std::ptrdiff_t>(m * cfg.n_mfcc));
    unit[m] = 0.0;
  }
  std::vector<double> logmel(cfg.n_mels);
  for (std::size_t t = 0; t < mel.rows; ++t) {
    for (std::size_t m = 0; m < cfg.n_mels; ++m)
      logmel[m] = std::log(std::max(mel.at(t, m), kLogMelFloor));
    for (std::size_t k = 0; k < cfg.n_mfcc; ++k) {
      double acc = 0.0;
      for (std::size_t m = 0; m < cfg.n_mels; ++m) acc += logmel[m] * basis.at(m, k);
      out.at(t, k) = acc;
    }
  }
  return out;
}

FeatureMatrix delta(const FeatureMatrix& c, int window) {
  if (window < 1) throw ValidationError("delta: window must be >= 1");
  if (c.rows == 0) throw ValidationError("delta: empty input");
  double denom = 0.0;
  for (int n = 1; n <= window; ++n) denom += static_cast<double>(n * n);
  denom *= 2.0;
  const auto last = static_cast<std::ptrdiff_t>(c.rows) - 1;
  FeatureMatrix d(c.rows, c.cols);
  for (std::ptrdiff_t t = 0; t <= last; ++t) {
    for (int n = 1; n <= window; ++n) {
      const std::ptrdiff_t ahead = std::min<std::ptrdiff_t>(t + n, last);
      const std::ptrdiff_t behind = std::max<std::ptrdiff_t>(t - n, 0);
      for (std::size_t j = 0; j < c.cols; ++j) {
        d.at(static_cast<std::size_t>(t), j) +=
            n * (c.at(static_cast<std::size_t>(ahead), j) -
                 c.at(static_cast<std::size_t>(behind), j));
      }
    }
  }
  for (double& v : d.values) v /= denom;
  return d;
}

FeatureMatrix compute_features(const WaveformBuffer& wave, const MfccConfig& cfg) {
  const FeatureMatrix static_coeffs = compute_mfcc(wave, cfg);
  const FeatureMatrix d1 = delta(static_coeffs, cfg.delta_window);
  const FeatureMatrix d2 = delta(d1, cfg.delta_window);
  const std::size_t k = cfg.n_mfcc;
  FeatureMatrix out(static_coeffs.rows, 3 * k);
  for (std::size_t t = 0; t < out.rows; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      out.at(t, j) = static_coeffs.at(t, j);
      out.at(t, k + j) = d1.at(t, j);
      out.at(t, 2 * k + j) = d2.at(t, j);
    }
  }
  return out;
}

std::size_t max_frames_for_seconds(double seconds, const MfccConfig& cfg) {
  if (!(seconds > 0.0)) {
    throw ValidationError("max audio length must be positive");
  }
  const auto samples = static_cast<std::size_t>(
      std::llround(seconds * static_cast<double>(kSampleRate)));
  const std::size_t n = num_frames(samples, cfg);
  if (n == 0) {
    throw ValidationError("max audio length is shorter than one frame");
  }
  return n;
}

PaddedFeatures pad_or_truncate_audio(const FeatureMatrix& m,
                                     std::size_t max_frames) {
  PaddedFeatures out;
  out.matrix = FeatureMatrix(max_frames, m.cols);
  out.valid_len = std::min(m.rows, max_frames);
  std::copy(m.values.begin(),
            m.values.begin() + static_cast<std::ptrdiff_t>(out.valid_len * m.cols),
            out.matrix.values.begin());
  return out;
}

}  // namespace emorec
