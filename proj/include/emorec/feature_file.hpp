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

#include "emorec/mfcc.hpp"

namespace emorec {

// One utterance in an "EMF1" feature cache.
struct FeatureRecord {
  std::string id;
  FeatureMatrix features;  // N x D, unpadded
};

// Layout: magic "EMF1", then per record
//   u32 id_length, id bytes (UTF-8), u32 N, u32 D, N*D little-endian float32
// until end of file. Values are stored as 32-bit floats.
void write_feature_file(const std::string& path,
                        const std::vector<FeatureRecord>& records);
std::vector<FeatureRecord> read_feature_file(const std::string& path);

}  // namespace emorec
