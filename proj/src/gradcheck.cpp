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

#include "emorec/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace emorec {

ModelConfig tiny_model_config() {
  ModelConfig cfg;
  cfg.audio_kernel_sizes = {3, 5};
  cfg.text_kernel_sizes = {3, 5};
  cfg.filters_per_scale = 4;
  cfg.xvector_dim = 6;
  cfg.fc_hidden = 8;
  cfg.audio_dim = 9;
  cfg.text_dim = 7;
  cfg.vocab_size = 11;
  cfg.normalize();
  return cfg;
}

FeatureBundle tiny_bundle(const ModelConfig& cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  FeatureBundle b;
  b.id = "gradcheck";
  b.audio_frames = 10;
  b.audio_dim = cfg.audio_dim;
  b.audio_valid = 8;
  b.mfcc.assign(b.audio_frames * b.audio_dim, 0.0f);
  for (std::size_t i = 0; i < b.audio_valid * b.audio_dim; ++i)
    b.mfcc[i] = static_cast<float>(gauss(rng));
  b.text_valid = 4;
  b.tokens.assign(5, 0);
  for (std::size_t i = 0; i < b.text_valid; ++i)
    b.tokens[i] = static_cast<std::int32_t>(1 + rng() % (cfg.vocab_size - 1));
  if (cfg.use_xvector) {
    b.xvector.resize(cfg.xvector_dim);
    for (double& v : b.xvector) v = gauss(rng);
  }
  b.label = static_cast<int>(rng() % cfg.n_classes);
  return b;
}

namespace {

double sample_loss(const ModelConfig& cfg, const ModelParameters& params,
                   const FeatureBundle& bundle, std::uint64_t dropout_seed, Graph& g,
                   Tensor* loss_out) {
  std::mt19937_64 rng(dropout_seed);
  const Prediction pred = model_forward(g, bundle, cfg, params, true, rng);
  const Tensor loss = cross_entropy(g, pred.probs, static_cast<std::size_t>(bundle.label));
  if (loss_out) *loss_out = loss;
  return loss.item();
}

}  // namespace

GradCheckResult gradient_check(const ModelConfig& cfg, const ModelParameters& params,
                               const FeatureBundle& bundle, std::uint64_t dropout_seed,
                               double step) {
  ModelParameters p = params.clone();
  for (auto& [name, t] : p.named()) {
    Tensor h = t;
    h.set_requires_grad(true);
  }
  p.zero_grad();
  {
    Graph g;
    Tensor loss;
    sample_loss(cfg, p, bundle, dropout_seed, g, &loss);
    g.backward(loss);
  }

  GradCheckResult result;
  for (auto& [name, t] : p.named()) {
    Tensor handle = t;
    const std::vector<double> analytic =
        handle.has_grad() ? std::vector<double>(handle.grad().begin(), handle.grad().end())
                          : std::vector<double>(handle.size(), 0.0);
    auto w = handle.mutable_data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      // The padding embedding row is pinned to zero and never trained.
      if (name == "embedding" && i < cfg.text_dim) continue;
      const double saved = w[i];
      w[i] = saved + step;
      Graph gp(false);
      const double up = sample_loss(cfg, p, bundle, dropout_seed, gp, nullptr);
      w[i] = saved - step;
      Graph gm(false);
      const double down = sample_loss(cfg, p, bundle, dropout_seed, gm, nullptr);
      w[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-8});
      const double rel = std::abs(analytic[i] - numeric) / denom;
      ++result.checked;
      if (rel > result.max_rel_error || !std::isfinite(rel)) {
        result.max_rel_error = rel;
        result.worst_tensor = name;
        result.worst_index = i;
        result.worst_analytic = analytic[i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

GradCheckResult run_gradcheck(std::uint64_t seed) {
  const ModelConfig cfg = tiny_model_config();
  const ModelParameters params = init_parameters(cfg, seed);
  const FeatureBundle bundle = tiny_bundle(cfg, seed + 1);
  return gradient_check(cfg, params, bundle, seed + 2);
}

}  // namespace emorec
