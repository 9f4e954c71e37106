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

#include <string>
#include <vector>

namespace emorec {

inline constexpr int kSampleRate = 16000;

struct WaveformBuffer {
  std::vector<float> samples;  // in [-1, 1]
  int sample_rate = kSampleRate;
};

// Reads a RIFF/WAVE file holding 16-bit PCM, mono, 16 kHz. Anything else is
// rejected with a ValidationError naming the offending header field.
WaveformBuffer load_wav(const std::string& path);

// Writes 16-bit PCM mono. Samples are scaled by 32768, rounded and clamped,
// so buffers produced by load_wav round-trip bit-exactly.
void write_wav(const std::string& path, const WaveformBuffer& wave);

}  // namespace emorec
