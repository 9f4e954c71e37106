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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace emorec {

// Model-ready inputs of one utterance.
struct FeatureBundle {
  std::string id;
  // audio_frames x audio_dim acoustic features, zero rows past audio_valid.
  std::vector<float> mfcc;
  std::size_t audio_frames = 0;
  std::size_t audio_dim = 0;
  std::size_t audio_valid = 0;
  // Vocabulary ids padded with 0 past text_valid.
  std::vector<std::int32_t> tokens;
  std::size_t text_valid = 0;
  // Empty when the record carries no x-vector.
  std::vector<double> xvector;
  int label = -1;
};

}  // namespace emorec
