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

#include "emorec/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "emorec/error.hpp"

namespace emorec {

namespace {

std::size_t mode_count(const std::vector<PoolMode>& modes) { return modes.size(); }

void normalize_modes(std::vector<PoolMode>& modes) {
  std::sort(modes.begin(), modes.end());
  modes.erase(std::unique(modes.begin(), modes.end()), modes.end());
}

void check_kernel_sizes(const std::vector<std::size_t>& sizes, const char* branch) {
  if (sizes.empty()) {
    throw ValidationError(std::string("model.") + branch +
                          "_kernel_sizes must not be empty");
  }
  std::set<std::size_t> seen;
  for (std::size_t s : sizes) {
    if (s == 0) {
      throw ValidationError(std::string("model.") + branch +
                            "_kernel_sizes contains 0");
    }
    if (!seen.insert(s).second) {
      throw ValidationError(std::string("model.") + branch +
                            "_kernel_sizes repeats size " + std::to_string(s));
    }
  }
}

Tensor glorot(const Shape& shape, std::size_t fan_in, std::size_t fan_out,
              std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> uni(-limit, limit);
  std::vector<double> values(shape_size(shape));
  for (double& v : values) v = uni(rng);
  return Tensor(shape, std::move(values), true);
}

const ConvBank& bank_for(const ModelParameters& p, Branch b) {
  return b == Branch::kAudio ? p.audio : p.text;
}

}  // namespace

void ModelConfig::normalize() {
  normalize_modes(audio_pool_modes);
  normalize_modes(text_pool_modes);
  validate();
}

void ModelConfig::validate() const {
  check_kernel_sizes(audio_kernel_sizes, "audio");
  check_kernel_sizes(text_kernel_sizes, "text");
  if (filters_per_scale == 0) throw ValidationError("model.filters_per_scale must be >= 1");
  if (audio_pool_modes.empty()) throw ValidationError("model.audio_pool_modes must not be empty");
  if (text_pool_modes.empty()) throw ValidationError("model.text_pool_modes must not be empty");
  if (!std::is_sorted(audio_pool_modes.begin(), audio_pool_modes.end()) ||
      !std::is_sorted(text_pool_modes.begin(), text_pool_modes.end()) ||
      std::adjacent_find(audio_pool_modes.begin(), audio_pool_modes.end()) !=
          audio_pool_modes.end() ||
      std::adjacent_find(text_pool_modes.begin(), text_pool_modes.end()) !=
          text_pool_modes.end()) {
    throw ValidationError("model pool modes must be distinct and in max, avg, std order");
  }
  if (use_attention && audio_channels() != text_channels()) {
    throw ValidationError(
        "model.use_attention needs equal audio and text channel counts, got " +
        std::to_string(audio_channels()) + " (audio) and " +
        std::to_string(text_channels()) + " (text)");
  }
  if (use_xvector && xvector_dim == 0) throw ValidationError("model.xvector_dim must be >= 1");
  if (fc_hidden == 0) throw ValidationError("model.fc_hidden must be >= 1");
  if (n_classes < 2) throw ValidationError("model.n_classes must be >= 2");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("model.dropout must be in [0, 1)");
  if (audio_dim == 0 || text_dim == 0) throw ValidationError("model feature dimensions must be >= 1");
  if (vocab_size < 2) throw ValidationError("model.vocab_size must be >= 2");
}

std::size_t ModelConfig::audio_block_dim() const {
  return mode_count(audio_pool_modes) * audio_channels() + (use_xvector ? xvector_dim : 0);
}

std::size_t ModelConfig::text_block_dim() const {
  return mode_count(text_pool_modes) * text_channels() + (use_swem ? 2 * text_dim : 0);
}

std::size_t ModelConfig::attention_dim() const {
  return use_attention ? mode_count(audio_pool_modes) * text_channels() : 0;
}

std::size_t ModelConfig::fusion_dim() const {
  return audio_block_dim() + text_block_dim() + attention_dim();
}

std::vector<std::pair<std::string, Tensor>> ModelParameters::named() const {
  std::vector<std::pair<std::string, Tensor>> out;
  const auto add_bank = [&out](const ConvBank& bank, const std::string& prefix) {
    for (std::size_t i = 0; i < bank.kernels.size(); ++i) {
      const std::string stem = prefix + ".conv" + std::to_string(bank.kernels[i].dim(1));
      out.emplace_back(stem + ".weight", bank.kernels[i]);
      out.emplace_back(stem + ".bias", bank.biases[i]);
    }
  };
  add_bank(audio, "audio");
  add_bank(text, "text");
  out.emplace_back("fc.weight", fc_weight);
  out.emplace_back("fc.bias", fc_bias);
  out.emplace_back("out.weight", out_weight);
  out.emplace_back("out.bias", out_bias);
  out.emplace_back("embedding", embedding);
  return out;
}

std::vector<Tensor> ModelParameters::trainable() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : named())
    if (t.requires_grad()) out.push_back(t);
  return out;
}

ModelParameters ModelParameters::clone() const {
  ModelParameters p;
  const auto copy_bank = [](const ConvBank& src, ConvBank& dst) {
    for (const Tensor& t : src.kernels) dst.kernels.push_back(t.clone());
    for (const Tensor& t : src.biases) dst.biases.push_back(t.clone());
  };
  copy_bank(audio, p.audio);
  copy_bank(text, p.text);
  p.fc_weight = fc_weight.clone();
  p.fc_bias = fc_bias.clone();
  p.out_weight = out_weight.clone();
  p.out_bias = out_bias.clone();
  p.embedding = embedding.clone();
  return p;
}

void ModelParameters::zero_grad() {
  for (auto& [name, t] : named()) {
    Tensor handle = t;
    handle.zero_grad();
  }
}

void ModelParameters::pin_padding_row() {
  auto rows = embedding.mutable_data();
  std::fill(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(embedding.dim(1)), 0.0);
}

void ModelParameters::round_to_float() {
  for (auto& [name, t] : named()) {
    Tensor handle = t;
    for (double& v : handle.mutable_data()) v = static_cast<double>(static_cast<float>(v));
  }
}

ModelParameters init_parameters(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  ModelParameters p;
  const std::size_t filters = cfg.filters_per_scale;
  const auto make_bank = [&](const std::vector<std::size_t>& sizes, std::size_t width,
                             ConvBank& bank) {
    for (std::size_t s : sizes) {
      bank.kernels.push_back(glorot({filters, s, width}, s * width, s * filters, rng));
      bank.biases.push_back(Tensor::zeros({filters}, true));
    }
  };
  make_bank(cfg.audio_kernel_sizes, cfg.audio_dim, p.audio);
  make_bank(cfg.text_kernel_sizes, cfg.text_dim, p.text);
  p.fc_weight = glorot({cfg.fc_hidden, cfg.fusion_dim()}, cfg.fusion_dim(), cfg.fc_hidden, rng);
  p.fc_bias = Tensor::zeros({cfg.fc_hidden}, true);
  p.out_weight = glorot({cfg.n_classes, cfg.fc_hidden}, cfg.fc_hidden, cfg.n_classes, rng);
  p.out_bias = Tensor::zeros({cfg.n_classes}, true);
  p.embedding = random_embeddings(cfg.vocab_size, cfg.text_dim, rng()).matrix;
  p.embedding.set_requires_grad(cfg.train_embeddings);
  return p;
}

void set_embeddings(ModelParameters& params, const ModelConfig& cfg,
                    const EmbeddingTable& table) {
  if (table.vocab_size() != cfg.vocab_size || table.dim() != cfg.text_dim) {
    throw ValidationError("embedding table " + shape_string(table.matrix.shape()) +
                          " does not match model vocab_size " +
                          std::to_string(cfg.vocab_size) + " x text_dim " +
                          std::to_string(cfg.text_dim));
  }
  params.embedding = table.matrix.clone();
  params.embedding.set_requires_grad(cfg.train_embeddings);
  params.pin_padding_row();
}

Tensor mscnn_forward(Graph& g, const Tensor& x, Branch branch,
                     const ModelConfig& cfg, const ModelParameters& params,
                     std::size_t valid_len) {
  const std::size_t width = branch == Branch::kAudio ? cfg.audio_dim : cfg.text_dim;
  if (x.rank() != 2 || x.dim(1) != width) {
    throw ValidationError(std::string(branch == Branch::kAudio ? "audio" : "text") +
                          " input " + shape_string(x.shape()) +
                          " does not have feature dimension " + std::to_string(width));
  }
  const ConvBank& bank = bank_for(params, branch);
  std::vector<Tensor> maps;
  maps.reserve(bank.kernels.size());
  for (std::size_t i = 0; i < bank.kernels.size(); ++i) {
    maps.push_back(relu(g, conv_full_width(g, x, bank.kernels[i], bank.biases[i])));
  }
  const Tensor merged = maps.size() == 1 ? maps[0] : concat_channels(g, maps);
  return mask_rows(g, merged, valid_len);
}

std::vector<Tensor> spu_pools(Graph& g, const Tensor& map,
                              std::span<const PoolMode> modes,
                              std::size_t valid_len) {
  if (modes.empty()) throw ValidationError("spu_forward: no pooling modes");
  std::vector<PoolMode> ordered(modes.begin(), modes.end());
  normalize_modes(ordered);
  std::vector<Tensor> out;
  for (PoolMode m : ordered) out.push_back(global_pool_time(g, map, m, valid_len));
  return out;
}

Tensor spu_forward(Graph& g, const Tensor& map, std::span<const PoolMode> modes,
                   std::size_t valid_len) {
  return concat(g, spu_pools(g, map, modes, valid_len));
}

AttentionResult attention_forward(Graph& g, const Tensor& text_map,
                                  std::span<const Tensor> contexts,
                                  std::size_t valid_len_text) {
  if (text_map.rank() != 2) throw ValidationError("attention: text map must be rank 2");
  const std::size_t rows = text_map.dim(0), ch = text_map.dim(1);
  if (valid_len_text == 0 || valid_len_text > rows) {
    throw ValidationError("attention: valid_len_text " + std::to_string(valid_len_text) +
                          " outside [1, " + std::to_string(rows) + "]");
  }
  const Tensor keys = row_slice(g, text_map, valid_len_text);
  AttentionResult result;
  std::vector<Tensor> attended;
  for (const Tensor& e : contexts) {
    if (e.rank() != 1 || e.dim(0) != ch) {
      throw ValidationError("attention: context " + shape_string(e.shape()) +
                            " does not match text channels " + std::to_string(ch));
    }
    // Padded positions are left out of the softmax entirely, which is the
    // same as masking their logits to -inf.
    const Tensor w = softmax(g, matvec(g, keys, e));
    attended.push_back(weighted_row_sum(g, w, keys));
    std::vector<double> padded(rows, 0.0);
    std::copy(w.data().begin(), w.data().end(), padded.begin());
    result.weights.push_back(std::move(padded));
  }
  result.attended = concat(g, attended);
  return result;
}

Prediction fuse_and_classify(Graph& g, const FusionInputs& in,
                             const ModelConfig& cfg,
                             const ModelParameters& params, bool training,
                             std::mt19937_64& rng) {
  const auto require = [](bool flag, bool present, const char* what) {
    if (flag && !present) throw ValidationError(std::string("fusion: missing ") + what);
    if (!flag && present) {
      throw ValidationError(std::string("fusion: ") + what + " given but disabled");
    }
  };
  require(cfg.use_xvector, in.xvector.has_value(), "x-vector");
  require(cfg.use_swem, in.swem.has_value(), "SWEM features");
  require(cfg.use_attention, in.attended.has_value(), "attention vector");

  std::vector<Tensor> parts{in.audio_spu};
  if (in.xvector) parts.push_back(*in.xvector);
  parts.push_back(in.text_spu);
  if (in.swem) parts.push_back(*in.swem);
  if (in.attended) parts.push_back(*in.attended);
  const Tensor fused = concat(g, parts);
  if (fused.size() != cfg.fusion_dim()) {
    throw ValidationError("fusion vector has " + std::to_string(fused.size()) +
                          " entries, configuration expects " +
                          std::to_string(cfg.fusion_dim()));
  }
  const Tensor dropped = dropout(g, fused, cfg.dropout, rng, training);
  const Tensor hidden = relu(g, affine(g, dropped, params.fc_weight, params.fc_bias));
  Prediction out;
  out.logits = affine(g, hidden, params.out_weight, params.out_bias);
  out.probs = softmax(g, out.logits);
  return out;
}

void check_bundle(const FeatureBundle& b, const ModelConfig& cfg) {
  const auto fail = [&b](const std::string& what) {
    throw ValidationError("sample " + b.id + ": " + what);
  };
  if (b.audio_dim != cfg.audio_dim) {
    fail("audio feature dimension " + std::to_string(b.audio_dim) +
         " != model audio_dim " + std::to_string(cfg.audio_dim));
  }
  if (b.mfcc.size() != b.audio_frames * b.audio_dim) fail("audio matrix size mismatch");
  if (b.audio_valid == 0 || b.audio_valid > b.audio_frames) fail("invalid audio length");
  if (b.text_valid == 0 || b.text_valid > b.tokens.size()) fail("invalid token length");
  if (cfg.use_xvector && b.xvector.size() != cfg.xvector_dim) {
    fail("x-vector has " + std::to_string(b.xvector.size()) +
         " values, model xvector_dim is " + std::to_string(cfg.xvector_dim));
  }
}

Prediction model_forward(Graph& g, const FeatureBundle& bundle,
                         const ModelConfig& cfg, const ModelParameters& params,
                         bool training, std::mt19937_64& rng) {
  check_bundle(bundle, cfg);
  const Tensor audio_x({bundle.audio_frames, bundle.audio_dim},
                       std::vector<double>(bundle.mfcc.begin(), bundle.mfcc.end()));
  const Tensor audio_map =
      mscnn_forward(g, audio_x, Branch::kAudio, cfg, params, bundle.audio_valid);
  const std::vector<Tensor> audio_pools =
      spu_pools(g, audio_map, cfg.audio_pool_modes, bundle.audio_valid);

  const Tensor words = gather_rows(g, params.embedding, bundle.tokens);
  const Tensor text_map =
      mscnn_forward(g, words, Branch::kText, cfg, params, bundle.text_valid);

  FusionInputs in;
  in.audio_spu = concat(g, audio_pools);
  in.text_spu = spu_forward(g, text_map, cfg.text_pool_modes, bundle.text_valid);
  if (cfg.use_xvector) in.xvector = Tensor({bundle.xvector.size()}, bundle.xvector);
  if (cfg.use_swem) in.swem = swem_features(g, words, bundle.text_valid);
  std::vector<std::vector<double>> weights;
  if (cfg.use_attention) {
    AttentionResult att = attention_forward(g, text_map, audio_pools, bundle.text_valid);
    in.attended = att.attended;
    weights = std::move(att.weights);
  }
  Prediction out = fuse_and_classify(g, in, cfg, params, training, rng);
  out.attention_weights = std::move(weights);
  return out;
}

std::vector<double> predict_probs(const FeatureBundle& bundle,
                                  const ModelConfig& cfg,
                                  const ModelParameters& params) {
  Graph g(false);
  std::mt19937_64 unused(0);
  const Prediction p = model_forward(g, bundle, cfg, params, false, unused);
  return {p.probs.data().begin(), p.probs.data().end()};
}

}  // namespace emorec
