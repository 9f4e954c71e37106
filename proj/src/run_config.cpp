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

#include "emorec/run_config.hpp"

#include <fstream>
#include <set>

#include "emorec/checkpoint.hpp"
#include "emorec/error.hpp"

namespace emorec {

void RunConfig::resolve() {
  train.seed = seed;
  model.audio_dim = features.mfcc.feature_dim();
  features.xvector_dim = model.xvector_dim;
  model.normalize();
  train.validate();
  features.validate();
  if (n_folds < 3) throw ValidationError("folds must be >= 3");
  if (fold && *fold >= n_folds) {
    throw ValidationError("fold " + std::to_string(*fold) + " out of range [0, " +
                          std::to_string(n_folds) + ")");
  }
  if (runs < 1) throw ValidationError("runs must be >= 1");
}

RunConfig run_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "seed", "manifest", "out",     "embeddings", "feature_cache", "folds", "fold",
      "runs", "threads",  "model",   "train",      "features"};
  if (!j.is_object()) throw ValidationError("run config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) throw ValidationError("unknown run config key '" + key + "'");
  if (!j.contains("seed")) throw ValidationError("run config: 'seed' is required");
  RunConfig cfg;
  try {
    cfg.seed = j.at("seed").get<std::uint64_t>();
    cfg.manifest = j.value("manifest", std::string());
    cfg.out_dir = j.value("out", std::string());
    cfg.embeddings = j.value("embeddings", std::string());
    cfg.feature_cache = j.value("feature_cache", std::string());
    cfg.n_folds = j.value("folds", std::size_t{10});
    if (j.contains("fold") && !j.at("fold").is_null()) cfg.fold = j.at("fold").get<std::size_t>();
    cfg.runs = j.value("runs", std::size_t{1});
    cfg.threads = j.value("threads", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("run config: ") + e.what());
  }
  if (j.contains("model")) cfg.model = model_config_from_json(j.at("model"));
  if (j.contains("train")) {
    nlohmann::json t = j.at("train");
    if (t.is_object()) t["seed"] = cfg.seed;
    cfg.train = train_config_from_json(t);
  }
  if (j.contains("features")) cfg.features = feature_config_from_json(j.at("features"));
  cfg.resolve();
  return cfg;
}

nlohmann::json run_config_to_json(const RunConfig& cfg) {
  nlohmann::json j = {{"seed", cfg.seed},
                      {"manifest", cfg.manifest},
                      {"out", cfg.out_dir},
                      {"embeddings", cfg.embeddings},
                      {"feature_cache", cfg.feature_cache},
                      {"folds", cfg.n_folds},
                      {"fold", nullptr},
                      {"runs", cfg.runs},
                      {"threads", cfg.threads},
                      {"model", model_config_to_json(cfg.model)},
                      {"train", train_config_to_json(cfg.train)},
                      {"features", feature_config_to_json(cfg.features)}};
  if (cfg.fold) j["fold"] = *cfg.fold;
  return j;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config " + path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
  try {
    return run_config_from_json(j);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

}  // namespace emorec
