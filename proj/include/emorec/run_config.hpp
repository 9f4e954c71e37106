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
#include <optional>
#include <string>

#include "emorec/data.hpp"
#include "emorec/model.hpp"
#include "emorec/training.hpp"
#include "json.hpp"

namespace emorec {

// Everything a training run needs. Loaded from a JSON file of the form
//
//   {"seed": 7, "manifest": "...", "out": "...", "embeddings": "...",
//    "folds": 10, "fold": 3, "runs": 1, "threads": 0,
//    "model": {...}, "train": {...}, "features": {...}}
//
// where only "seed" is required. train.seed is ignored in favor of the
// top-level seed.
struct RunConfig {
  std::uint64_t seed = 0;
  std::string manifest;
  std::string out_dir;
  std::string embeddings;     // optional word-vector file
  std::string feature_cache;  // optional EMF1 file matching the manifest
  std::size_t n_folds = 10;
  std::optional<std::size_t> fold;  // only this fold when set
  std::size_t runs = 1;
  std::size_t threads = 0;
  ModelConfig model;
  TrainConfig train;
  FeatureConfig features;

  // Propagates shared values (seed, audio feature width, x-vector
  // dimension) and validates every part.
  void resolve();
};

RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json run_config_to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

}  // namespace emorec
