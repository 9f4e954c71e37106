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
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "emorec/feature_bundle.hpp"
#include "emorec/ops.hpp"
#include "emorec/tensor.hpp"
#include "emorec/text.hpp"

namespace emorec {

// Architecture of the bimodal multi-scale CNN classifier. The boolean flags
// and pool-mode sets select the ablation variants.
struct ModelConfig {
  std::vector<std::size_t> audio_kernel_sizes{5, 7, 9, 11};
  std::vector<std::size_t> text_kernel_sizes{3, 5, 7, 9};
  std::size_t filters_per_scale = 128;
  std::vector<PoolMode> audio_pool_modes{PoolMode::kMax, PoolMode::kAvg, PoolMode::kStd};
  std::vector<PoolMode> text_pool_modes{PoolMode::kMax, PoolMode::kAvg, PoolMode::kStd};
  bool use_attention = true;
  bool use_xvector = true;
  bool use_swem = true;
  std::size_t xvector_dim = 512;
  std::size_t fc_hidden = 256;
  std::size_t n_classes = 4;
  double dropout = 0.3;
  std::size_t audio_dim = 96;
  std::size_t text_dim = kEmbeddingDim;
  std::size_t vocab_size = 2;
  bool train_embeddings = true;

  // Sorts pool modes into the fixed (max, avg, std) order and removes
  // duplicates, then checks every invariant.
  void normalize();
  void validate() const;

  std::size_t audio_channels() const { return audio_kernel_sizes.size() * filters_per_scale; }
  std::size_t text_channels() const { return text_kernel_sizes.size() * filters_per_scale; }
  std::size_t audio_block_dim() const;
  std::size_t text_block_dim() const;
  std::size_t attention_dim() const;
  std::size_t fusion_dim() const;
};

enum class Branch { kAudio, kText };

struct ConvBank {
  std::vector<Tensor> kernels;  // F x s x D per scale
  std::vector<Tensor> biases;   // F per scale
};

struct ModelParameters {
  ConvBank audio;
  ConvBank text;
  Tensor fc_weight;   // fc_hidden x fusion_dim
  Tensor fc_bias;
  Tensor out_weight;  // n_classes x fc_hidden
  Tensor out_bias;
  Tensor embedding;   // vocab_size x text_dim, row 0 zero

  // Every tensor with a stable name, in checkpoint order.
  std::vector<std::pair<std::string, Tensor>> named() const;
  // Tensors updated by the optimizer.
  std::vector<Tensor> trainable() const;
  ModelParameters clone() const;
  void zero_grad();
  void pin_padding_row();
  // Rounds every value to the nearest 32-bit float, which is what a
  // checkpoint round trip stores.
  void round_to_float();
};

// Glorot-uniform weights, zero biases, uniform(-0.05, 0.05) embeddings with
// the padding row zeroed. Deterministic in the seed.
ModelParameters init_parameters(const ModelConfig& cfg, std::uint64_t seed);

// Replaces the embedding rows with a loaded table.
void set_embeddings(ModelParameters& params, const ModelConfig& cfg,
                    const EmbeddingTable& table);

// Parallel same-padded convolutions (one per kernel size) with ReLU,
// concatenated along channels. Rows at or after valid_len are zeroed.
Tensor mscnn_forward(Graph& g, const Tensor& x, Branch branch,
                     const ModelConfig& cfg, const ModelParameters& params,
                     std::size_t valid_len);

// Global pooling of a feature map, one vector per mode in (max, avg, std)
// order.
std::vector<Tensor> spu_pools(Graph& g, const Tensor& map,
                              std::span<const PoolMode> modes,
                              std::size_t valid_len);
// The pooled vectors of spu_pools concatenated.
Tensor spu_forward(Graph& g, const Tensor& map, std::span<const PoolMode> modes,
                   std::size_t valid_len);

struct AttentionResult {
  Tensor attended;  // concat over contexts of sum_k w_k h_k
  // Per context, one weight per text position; zero past valid_len.
  std::vector<std::vector<double>> weights;
};

// Scores every valid text position k by e . h_k for each audio context e,
// normalizes with a softmax restricted to valid positions, and returns the
// weighted sums concatenated in context order.
AttentionResult attention_forward(Graph& g, const Tensor& text_map,
                                  std::span<const Tensor> contexts,
                                  std::size_t valid_len_text);

struct FusionInputs {
  Tensor audio_spu;
  std::optional<Tensor> xvector;
  Tensor text_spu;
  std::optional<Tensor> swem;
  std::optional<Tensor> attended;
};

struct Prediction {
  Tensor probs;
  Tensor logits;
  std::vector<std::vector<double>> attention_weights;
};

// concat(audio_spu, xvector?, text_spu, swem?, attended?) -> dropout ->
// affine + ReLU -> affine -> softmax.
Prediction fuse_and_classify(Graph& g, const FusionInputs& in,
                             const ModelConfig& cfg,
                             const ModelParameters& params, bool training,
                             std::mt19937_64& rng);

// Full forward pass for one utterance.
Prediction model_forward(Graph& g, const FeatureBundle& bundle,
                         const ModelConfig& cfg, const ModelParameters& params,
                         bool training, std::mt19937_64& rng);

// Inference-mode class posterior.
std::vector<double> predict_probs(const FeatureBundle& bundle,
                                  const ModelConfig& cfg,
                                  const ModelParameters& params);

// Checks that a bundle carries the inputs the configuration requires.
void check_bundle(const FeatureBundle& bundle, const ModelConfig& cfg);

}  // namespace emorec
