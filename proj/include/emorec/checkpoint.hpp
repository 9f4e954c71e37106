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

#include "emorec/model.hpp"
#include "json.hpp"

namespace emorec {

inline constexpr int kCheckpointVersion = 1;

nlohmann::json model_config_to_json(const ModelConfig& cfg);
// Missing keys keep their defaults; unknown keys are rejected.
ModelConfig model_config_from_json(const nlohmann::json& j);

struct Checkpoint {
  ModelConfig config;
  ModelParameters params;
  nlohmann::json metadata;  // feature settings, vocabulary, provenance
};

// "EMC1", u64 little-endian header length, a UTF-8 JSON header holding the
// format version, the model configuration, the tensor directory (name, shape,
// byte offset into the data section) and free-form metadata; then every
// tensor as row-major little-endian float32.
void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const ModelParameters& params,
                     const nlohmann::json& metadata = nlohmann::json::object());

// Rejects files whose tensor directory disagrees with the shapes implied by
// the stored configuration.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace emorec
