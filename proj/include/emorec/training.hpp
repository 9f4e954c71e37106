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
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "emorec/feature_bundle.hpp"
#include "emorec/model.hpp"
#include "emorec/tensor.hpp"
#include "json.hpp"

namespace emorec {

struct TrainConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double clip_norm = 1.0;
  std::size_t batch_size = 64;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  // Epochs without a dev WA improvement before stopping; 0 disables.
  std::size_t patience = 10;

  void validate() const;
};

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct AdamState {
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
  std::size_t t = 0;
};

// Scales all gradients jointly so their global L2 norm is at most max_norm.
// Returns the norm before clipping. Throws NumericError on a non-finite norm.
double clip_global_norm(std::span<Tensor> params, double max_norm);

// One bias-corrected Adam update of every tensor from its gradient. Tensors
// without a gradient buffer are treated as having a zero gradient.
void adam_step(std::span<Tensor> params, AdamState& state, const TrainConfig& cfg);
// Same over the trainable model tensors; the padding embedding row is reset
// to zero afterwards.
void adam_step(ModelParameters& params, AdamState& state, const TrainConfig& cfg);

// Mean cross-entropy of a mini-batch, accumulated into the parameter
// gradients (which are zeroed first).
double batch_loss_and_grad(const ModelConfig& cfg, ModelParameters& params,
                           std::span<const FeatureBundle> data,
                           std::span<const std::size_t> batch, std::mt19937_64& rng);

struct EpochStats {
  double mean_loss = 0.0;
  std::size_t batches = 0;
};

// One pass over a shuffled copy of the data. The final short batch is kept.
EpochStats train_epoch(const ModelConfig& cfg, ModelParameters& params,
                       std::span<const FeatureBundle> data, const TrainConfig& tcfg,
                       AdamState& state, std::mt19937_64& rng);

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double dev_wa = 0.0;
  double dev_ua = 0.0;
};

struct FitResult {
  ModelParameters best;
  std::size_t best_epoch = 0;
  double best_dev_wa = -1.0;
  std::vector<EpochLog> history;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Trains for up to tcfg.epochs, evaluating on dev after every epoch and
// keeping the parameters with the best dev WA. With an empty dev set the
// final parameters are kept and no early stopping happens.
FitResult fit(const ModelConfig& cfg, ModelParameters params,
              std::span<const FeatureBundle> train, std::span<const FeatureBundle> dev,
              const TrainConfig& tcfg, const EpochCallback& on_epoch = {});

}  // namespace emorec
