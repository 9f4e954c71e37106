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

#include "emorec/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "emorec/error.hpp"

namespace emorec {

namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

WaveformBuffer load_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open WAV file " + path);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const auto fail = [&](const std::string& what) -> ValidationError {
    return ValidationError(path + ": " + what);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* hdr = bytes.data() + pos;
    const std::uint32_t chunk_size = read_u32(hdr + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) throw fail("truncated chunk");
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw fail("fmt chunk too short");
      format = read_u16(bytes.data() + body);
      channels = read_u16(bytes.data() + body + 2);
      rate = read_u32(bytes.data() + body + 4);
      bits = read_u16(bytes.data() + body + 14);
      have_fmt = true;
      if (format != 1) {
        throw fail("audio_format " + std::to_string(format) +
                   " is not PCM (1)");
      }
      if (channels != 1) {
        throw fail("num_channels " + std::to_string(channels) +
                   " is not mono (1)");
      }
      if (rate != static_cast<std::uint32_t>(kSampleRate)) {
        throw fail("sample_rate " + std::to_string(rate) + " is not " +
                   std::to_string(kSampleRate));
      }
      if (bits != 16) {
        throw fail("bits_per_sample " + std::to_string(bits) + " is not 16");
      }
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      WaveformBuffer wave;
      wave.sample_rate = static_cast<int>(rate);
      wave.samples.resize(chunk_size / 2);
      for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        const auto raw = static_cast<std::int16_t>(read_u16(bytes.data() + body + 2 * i));
        wave.samples[i] = static_cast<float>(raw) / 32768.0f;
      }
      return wave;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }
  throw fail(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

void write_wav(const std::string& path, const WaveformBuffer& wave) {
  if (wave.sample_rate != kSampleRate) {
    throw ValidationError("write_wav: sample_rate " +
                          std::to_string(wave.sample_rate) + " is not " +
                          std::to_string(kSampleRate));
  }
  const auto data_bytes = static_cast<std::uint32_t>(wave.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(kSampleRate));
  put_u32(out, static_cast<std::uint32_t>(kSampleRate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, data_bytes);
  for (float s : wave.samples) {
    const double scaled = std::round(static_cast<double>(s) * 32768.0);
    const auto v = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
    put_u16(out, static_cast<std::uint16_t>(v));
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write WAV file " + path);
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace emorec
