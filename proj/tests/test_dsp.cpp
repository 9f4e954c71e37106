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

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "doctest.h"
#include "emorec/error.hpp"
#include "emorec/feature_file.hpp"
#include "emorec/mfcc.hpp"
#include "emorec/wav.hpp"
#include "oracles.hpp"

using namespace emorec;
namespace fs = std::filesystem;

namespace {

WaveformBuffer sine(double hz, double seconds, double amp = 0.5) {
  WaveformBuffer w;
  const auto n = static_cast<std::size_t>(std::llround(seconds * kSampleRate));
  for (std::size_t t = 0; t < n; ++t)
    w.samples.push_back(static_cast<float>(
        amp * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(t) / kSampleRate)));
  return w;
}

void patch_u16(const fs::path& path, std::streamoff offset, std::uint16_t v) {
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(offset);
  const char bytes[2] = {static_cast<char>(v & 0xff), static_cast<char>(v >> 8)};
  f.write(bytes, 2);
}

void patch_u32(const fs::path& path, std::streamoff offset, std::uint32_t v) {
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(offset);
  char bytes[4];
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  f.write(bytes, 4);
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("frame count formula") {
  const MfccConfig cfg;
  CHECK(num_frames(16000, cfg) == 98);
  CHECK(num_frames(400, cfg) == 1);
  CHECK(num_frames(399, cfg) == 0);
  CHECK(num_frames(560, cfg) == 2);
  CHECK(max_frames_for_seconds(7.5, cfg) == 748);
  CHECK(max_frames_for_seconds(1.0, cfg) == 98);
  for (std::size_t n = 400; n < 5000; n += 37)
    CHECK(num_frames(n, cfg) == 1 + (n - 400) / 160);
}

TEST_CASE("FFT agrees with the naive DFT") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (std::size_t n : {1u, 2u, 8u, 64u, 512u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {gauss(rng), gauss(rng)};
    const auto want = oracle::dft(x);
    auto got = x;
    fft(got);
    double scale = 0.0, err = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      scale = std::max(scale, std::abs(want[k]));
      err = std::max(err, std::abs(got[k] - want[k]));
    }
    CHECK(err <= 1e-9 * scale);
  }
  std::vector<std::complex<double>> bad(6);
  CHECK_THROWS_AS(fft(bad), ValidationError);
}

TEST_CASE("Parseval identity") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> gauss;
  std::vector<std::complex<double>> x(256);
  double time_energy = 0.0;
  for (auto& v : x) {
    v = gauss(rng);
    time_energy += std::norm(v);
  }
  fft(x);
  double freq_energy = 0.0;
  for (const auto& v : x) freq_energy += std::norm(v);
  CHECK(freq_energy / 256.0 == doctest::Approx(time_energy).epsilon(1e-12));
}

TEST_CASE("mel scale round trip") {
  CHECK(hz_to_mel(0.0) == 0.0);
  CHECK(hz_to_mel(700.0) == doctest::Approx(2595.0 * std::log10(2.0)));
  for (double hz : {10.0, 440.0, 1000.0, 7999.0}) CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz));
}

TEST_CASE("filterbank shape") {
  const MelFilterbank fb(64, 512, 16000, 0.0, 8000.0);
  CHECK(fb.size() == 64);
  double last = 0.0;
  for (std::size_t m = 0; m < 64; ++m) {
    CHECK(fb.center_hz(m) > last);
    last = fb.center_hz(m);
    double peak = 0.0;
    for (std::size_t k = 0; k < 257; ++k) {
      CHECK(fb.weight(m, k) >= 0.0);
      CHECK(fb.weight(m, k) <= 1.0);
      peak = std::max(peak, fb.weight(m, k));
    }
    CHECK(peak > 0.0);
  }
}

TEST_CASE("1 kHz tone peaks in the filter centered nearest 1 kHz") {
  MfccConfig cfg;
  const FeatureMatrix e = mel_energies(sine(1000.0, 0.5), cfg);
  // Centers are equally spaced on the mel scale between fmin and fmax.
  const auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  const double step = mel(8000.0) / 65.0;
  std::size_t expected = 0;
  double best = 1e300;
  for (std::size_t m = 0; m < 64; ++m) {
    const double d = std::abs(step * static_cast<double>(m + 1) - mel(1000.0));
    if (d < best) best = d, expected = m;
  }
  for (std::size_t t = 0; t < e.rows; ++t) {
    std::size_t arg = 0;
    for (std::size_t m = 1; m < e.cols; ++m)
      if (e.at(t, m) > e.at(t, arg)) arg = m;
    CHECK(arg == expected);
  }
}

TEST_CASE("periodic Hamming window") {
  const std::vector<double> w = hamming_window(400);
  CHECK(w[0] == doctest::Approx(0.08));
  CHECK(w[200] == doctest::Approx(1.0));
  for (std::size_t n = 0; n < 400; ++n)
    CHECK(w[n] == doctest::Approx(0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / 400.0)));
}

TEST_CASE("power spectrum of a DC frame") {
  const std::vector<double> frame(8, 1.0);
  const std::vector<double> p = power_spectrum(frame, 16);
  CHECK(p.size() == 9);
  CHECK(p[0] == doctest::Approx(64.0));
}

TEST_CASE("orthonormal DCT-II matches the defining sum and preserves energy") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  std::vector<double> x(64);
  double energy = 0.0;
  for (double& v : x) {
    v = gauss(rng);
    energy += v * v;
  }
  const std::vector<double> y = dct_ii_orthonormal(x, 64);
  double out_energy = 0.0;
  for (std::size_t k = 0; k < 64; ++k) {
    double acc = 0.0;
    for (std::size_t n = 0; n < 64; ++n)
      acc += x[n] * std::cos(std::numbers::pi * static_cast<double>(k) * (2.0 * n + 1.0) / 128.0);
    acc *= std::sqrt(2.0 / 64.0) * (k == 0 ? 1.0 / std::sqrt(2.0) : 1.0);
    CHECK(std::abs(y[k] - acc) < 1e-12);
    out_energy += y[k] * y[k];
  }
  CHECK(out_energy == doctest::Approx(energy).epsilon(1e-12));
}

TEST_CASE("deltas") {
  FeatureMatrix constant(10, 3);
  for (double& v : constant.values) v = 4.2;
  const FeatureMatrix d = delta(constant, 2);
  for (double v : d.values) CHECK(v == 0.0);

  FeatureMatrix ramp(12, 1);
  for (std::size_t t = 0; t < 12; ++t) ramp.at(t, 0) = 3.0 * static_cast<double>(t);
  const FeatureMatrix r = delta(ramp, 2);
  for (std::size_t t = 2; t < 10; ++t) CHECK(r.at(t, 0) == doctest::Approx(3.0));
  // Edge frames see replicated neighbours.
  CHECK(r.at(0, 0) == doctest::Approx((1.0 * 3.0 + 2.0 * 6.0) / 10.0));
  CHECK_THROWS_AS(delta(ramp, 0), ValidationError);
}

TEST_CASE("feature matrix layout") {
  const MfccConfig cfg;
  const FeatureMatrix f = compute_features(sine(440.0, 1.0), cfg);
  CHECK(f.rows == 98);
  CHECK(f.cols == 96);
  for (double v : f.values) CHECK(std::isfinite(v));

  // Silence hits the log floor and stays finite.
  WaveformBuffer silence;
  silence.samples.assign(16000, 0.0f);
  const FeatureMatrix s = compute_mfcc(silence, cfg);
  CHECK(s.at(0, 0) == doctest::Approx(std::log(kLogMelFloor) * std::sqrt(64.0)));

  WaveformBuffer tiny;
  tiny.samples.assign(100, 0.0f);
  CHECK_THROWS_AS(compute_features(tiny, cfg), ValidationError);
}

TEST_CASE("pad or truncate") {
  FeatureMatrix m(5, 2);
  for (std::size_t i = 0; i < 10; ++i) m.values[i] = static_cast<double>(i + 1);
  const PaddedFeatures p = pad_or_truncate_audio(m, 8);
  CHECK(p.valid_len == 5);
  CHECK(p.matrix.rows == 8);
  CHECK(p.matrix.at(4, 1) == 10.0);
  CHECK(p.matrix.at(5, 0) == 0.0);
  const PaddedFeatures t = pad_or_truncate_audio(m, 3);
  CHECK(t.valid_len == 3);
  CHECK(t.matrix.at(2, 1) == 6.0);
}

TEST_CASE("mfcc config validation") {
  MfccConfig cfg;
  cfg.n_mfcc = 65;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = MfccConfig{};
  cfg.fft_size = 300;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = MfccConfig{};
  cfg.fmax = 9000.0;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("WAV round trip and header checks") {
  const fs::path dir = oracle::temp_dir("wav");
  const fs::path path = dir / "a.wav";
  WaveformBuffer w;
  for (int i = -100; i < 100; ++i) w.samples.push_back(static_cast<float>(i) / 128.0f);
  write_wav(path.string(), w);
  const WaveformBuffer r = load_wav(path.string());
  REQUIRE(r.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) CHECK(r.samples[i] == w.samples[i]);
  CHECK(r.sample_rate == 16000);

  const auto broken = [&](const char* name, std::streamoff off, std::uint32_t value, bool wide) {
    const fs::path p = dir / name;
    fs::copy_file(path, p, fs::copy_options::overwrite_existing);
    if (wide) patch_u32(p, off, value);
    else patch_u16(p, off, static_cast<std::uint16_t>(value));
    return error_of([&] { load_wav(p.string()); });
  };
  CHECK(broken("fmt.wav", 20, 3, false).find("audio_format") != std::string::npos);
  CHECK(broken("ch.wav", 22, 2, false).find("num_channels") != std::string::npos);
  CHECK(broken("sr.wav", 24, 8000, true).find("sample_rate") != std::string::npos);
  CHECK(broken("bits.wav", 34, 8, false).find("bits_per_sample") != std::string::npos);
  CHECK_THROWS_AS(load_wav((dir / "missing.wav").string()), ValidationError);
}

TEST_CASE("EMF1 feature cache") {
  const fs::path dir = oracle::temp_dir("emf");
  FeatureMatrix a(3, 2);
  for (std::size_t i = 0; i < 6; ++i) a.values[i] = 0.25 * static_cast<double>(i) - 0.3;
  FeatureMatrix b(1, 2);
  b.values = {1.5, -2.0};
  const std::vector<FeatureRecord> recs = {{"utt_a", a}, {"utt_b", b}};
  const std::string path = (dir / "f.emf").string();
  write_feature_file(path, recs);
  const std::vector<FeatureRecord> back = read_feature_file(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0].id == "utt_a");
  CHECK(back[0].features.rows == 3);
  for (std::size_t i = 0; i < 6; ++i)
    CHECK(back[0].features.values[i] == static_cast<double>(static_cast<float>(a.values[i])));
  CHECK(back[1].features.values == b.values);

  // Truncation inside a record is a corrupt file.
  const auto size = fs::file_size(path);
  fs::resize_file(path, size - 3);
  CHECK_THROWS_AS(read_feature_file(path), CorruptFileError);
  {
    std::ofstream os(path, std::ios::binary);
    os << "NOPE";
  }
  CHECK_THROWS_AS(read_feature_file(path), CorruptFileError);
}
