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

#include "emorec/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "emorec/error.hpp"
#include "emorec/evaluation.hpp"

namespace emorec {

void TrainConfig::validate() const {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("lr must be finite and >= 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ValidationError("beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ValidationError("beta2 must be in [0, 1)");
  if (!(adam_eps > 0.0)) throw ValidationError("adam_eps must be > 0");
  if (!(clip_norm > 0.0)) throw ValidationError("clip_norm must be > 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
}

nlohmann::json train_config_to_json(const TrainConfig& cfg) {
  return {{"lr", cfg.lr},
          {"beta1", cfg.beta1},
          {"beta2", cfg.beta2},
          {"adam_eps", cfg.adam_eps},
          {"clip_norm", cfg.clip_norm},
          {"batch_size", cfg.batch_size},
          {"epochs", cfg.epochs},
          {"seed", cfg.seed},
          {"patience", cfg.patience}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"lr",        "beta1",      "beta2",
                                              "adam_eps",  "clip_norm",  "batch_size",
                                              "epochs",    "seed",       "patience"};
  if (!j.is_object()) throw ValidationError("train config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown train config key '" + key + "'");
  }
  TrainConfig cfg;
  try {
    const auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("lr", cfg.lr);
    get("beta1", cfg.beta1);
    get("beta2", cfg.beta2);
    get("adam_eps", cfg.adam_eps);
    get("clip_norm", cfg.clip_norm);
    get("batch_size", cfg.batch_size);
    get("epochs", cfg.epochs);
    get("seed", cfg.seed);
    get("patience", cfg.patience);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("train config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

double clip_global_norm(std::span<Tensor> params, double max_norm) {
  double sq = 0.0;
  for (const Tensor& t : params) {
    if (!t.has_grad()) continue;
    for (double g : t.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (!params[i].has_grad()) continue;
      for (double g : params[i].grad()) {
        if (!std::isfinite(g)) {
          throw NumericError("non-finite gradient in parameter tensor " + std::to_string(i) +
                             " of shape " + shape_string(params[i].shape()));
        }
      }
    }
    throw NumericError("gradient norm overflowed");
  }
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (Tensor& t : params) {
      if (!t.has_grad()) continue;
      for (double& g : t.mutable_grad()) g *= factor;
    }
  }
  return norm;
}

void adam_step(std::span<Tensor> params, AdamState& state, const TrainConfig& cfg) {
  if (state.m.empty()) {
    for (const Tensor& t : params) {
      state.m.emplace_back(t.size(), 0.0);
      state.v.emplace_back(t.size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw ValidationError("optimizer state tracks " + std::to_string(state.m.size()) +
                          " tensors, got " + std::to_string(params.size()));
  }
  ++state.t;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& param = params[p];
    std::vector<double>& m = state.m[p];
    std::vector<double>& v = state.v[p];
    if (m.size() != param.size()) {
      throw ValidationError("optimizer state size mismatch for tensor " + std::to_string(p));
    }
    auto w = param.mutable_data();
    const bool has = param.has_grad();
    const std::span<const double> grad = has ? param.grad() : std::span<const double>{};
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double g = has ? grad[i] : 0.0;
      m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
      v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      w[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
  }
}

void adam_step(ModelParameters& params, AdamState& state, const TrainConfig& cfg) {
  std::vector<Tensor> tensors = params.trainable();
  adam_step(tensors, state, cfg);
  params.pin_padding_row();
}

double batch_loss_and_grad(const ModelConfig& cfg, ModelParameters& params,
                           std::span<const FeatureBundle> data,
                           std::span<const std::size_t> batch, std::mt19937_64& rng) {
  params.zero_grad();
  const double inv = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (std::size_t idx : batch) {
    const FeatureBundle& sample = data[idx];
    if (sample.label < 0 || static_cast<std::size_t>(sample.label) >= cfg.n_classes) {
      throw ValidationError("sample " + sample.id + " has no valid label");
    }
    Graph g;
    const Prediction pred = model_forward(g, sample, cfg, params, true, rng);
    const Tensor ce = cross_entropy(g, pred.probs, static_cast<std::size_t>(sample.label));
    const Tensor scaled = scale(g, ce, inv);
    g.backward(scaled);
    loss += scaled.item();
  }
  return loss;
}

EpochStats train_epoch(const ModelConfig& cfg, ModelParameters& params,
                       std::span<const FeatureBundle> data, const TrainConfig& tcfg,
                       AdamState& state, std::mt19937_64& rng) {
  if (data.empty()) throw ValidationError("train_epoch: empty dataset");
  tcfg.validate();
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  EpochStats stats;
  double total = 0.0;
  for (std::size_t start = 0; start < order.size(); start += tcfg.batch_size) {
    const std::size_t end = std::min(order.size(), start + tcfg.batch_size);
    const std::span<const std::size_t> batch(order.data() + start, end - start);
    const double loss = batch_loss_and_grad(cfg, params, data, batch, rng);
    if (!std::isfinite(loss)) {
      throw NumericError("non-finite loss in batch " + std::to_string(stats.batches) +
                         " (first sample " + data[batch[0]].id + ")");
    }
    std::vector<Tensor> tensors = params.trainable();
    try {
      clip_global_norm(tensors, tcfg.clip_norm);
    } catch (const NumericError& e) {
      throw NumericError("batch " + std::to_string(stats.batches) + " (first sample " +
                         data[batch[0]].id + "): " + e.what());
    }
    adam_step(params, state, tcfg);
    total += loss * static_cast<double>(batch.size());
    ++stats.batches;
  }
  stats.mean_loss = total / static_cast<double>(data.size());
  return stats;
}

FitResult fit(const ModelConfig& cfg, ModelParameters params,
              std::span<const FeatureBundle> train, std::span<const FeatureBundle> dev,
              const TrainConfig& tcfg, const EpochCallback& on_epoch) {
  tcfg.validate();
  std::mt19937_64 rng(tcfg.seed);
  AdamState state;
  FitResult result;
  std::size_t stale = 0;
  for (std::size_t epoch = 1; epoch <= tcfg.epochs; ++epoch) {
    EpochLog log;
    log.epoch = epoch;
    log.train_loss = train_epoch(cfg, params, train, tcfg, state, rng).mean_loss;
    if (!dev.empty()) {
      const Evaluation ev = evaluate(cfg, params, dev);
      log.dev_wa = ev.metrics.wa;
      log.dev_ua = ev.metrics.ua;
    }
    result.history.push_back(log);
    if (on_epoch) on_epoch(log);

    if (dev.empty()) continue;
    if (log.dev_wa > result.best_dev_wa) {
      result.best_dev_wa = log.dev_wa;
      result.best_epoch = epoch;
      result.best = params.clone();
      stale = 0;
    } else if (tcfg.patience > 0 && ++stale >= tcfg.patience) {
      break;
    }
  }
  if (dev.empty()) {
    result.best = params;
    result.best_epoch = result.history.size();
  }
  return result;
}

}  // namespace emorec
