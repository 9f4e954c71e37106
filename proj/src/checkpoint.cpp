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

#include "emorec/checkpoint.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "binary_io.hpp"
#include "emorec/error.hpp"

namespace emorec {

namespace {

constexpr char kMagic[4] = {'E', 'M', 'C', '1'};

nlohmann::json modes_to_json(const std::vector<PoolMode>& modes) {
  nlohmann::json arr = nlohmann::json::array();
  for (PoolMode m : modes) arr.push_back(std::string(pool_mode_name(m)));
  return arr;
}

std::vector<PoolMode> modes_from_json(const nlohmann::json& j) {
  std::vector<PoolMode> out;
  for (const auto& v : j) out.push_back(parse_pool_mode(v.get<std::string>()));
  return out;
}

}  // namespace

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  return {
      {"audio_kernel_sizes", cfg.audio_kernel_sizes},
      {"text_kernel_sizes", cfg.text_kernel_sizes},
      {"filters_per_scale", cfg.filters_per_scale},
      {"audio_pool_modes", modes_to_json(cfg.audio_pool_modes)},
      {"text_pool_modes", modes_to_json(cfg.text_pool_modes)},
      {"use_attention", cfg.use_attention},
      {"use_xvector", cfg.use_xvector},
      {"use_swem", cfg.use_swem},
      {"xvector_dim", cfg.xvector_dim},
      {"fc_hidden", cfg.fc_hidden},
      {"n_classes", cfg.n_classes},
      {"dropout", cfg.dropout},
      {"audio_dim", cfg.audio_dim},
      {"text_dim", cfg.text_dim},
      {"vocab_size", cfg.vocab_size},
      {"train_embeddings", cfg.train_embeddings},
  };
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {
      "audio_kernel_sizes", "text_kernel_sizes", "filters_per_scale",
      "audio_pool_modes",   "text_pool_modes",   "use_attention",
      "use_xvector",        "use_swem",          "xvector_dim",
      "fc_hidden",          "n_classes",         "dropout",
      "audio_dim",          "text_dim",          "vocab_size",
      "train_embeddings"};
  if (!j.is_object()) throw ValidationError("model config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!known.count(key)) throw ValidationError("unknown model config key '" + key + "'");
  }
  ModelConfig cfg;
  try {
    const auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) j.at(key).get_to(field);
    };
    get("audio_kernel_sizes", cfg.audio_kernel_sizes);
    get("text_kernel_sizes", cfg.text_kernel_sizes);
    get("filters_per_scale", cfg.filters_per_scale);
    if (j.contains("audio_pool_modes")) cfg.audio_pool_modes = modes_from_json(j["audio_pool_modes"]);
    if (j.contains("text_pool_modes")) cfg.text_pool_modes = modes_from_json(j["text_pool_modes"]);
    get("use_attention", cfg.use_attention);
    get("use_xvector", cfg.use_xvector);
    get("use_swem", cfg.use_swem);
    get("xvector_dim", cfg.xvector_dim);
    get("fc_hidden", cfg.fc_hidden);
    get("n_classes", cfg.n_classes);
    get("dropout", cfg.dropout);
    get("audio_dim", cfg.audio_dim);
    get("text_dim", cfg.text_dim);
    get("vocab_size", cfg.vocab_size);
    get("train_embeddings", cfg.train_embeddings);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model config: ") + e.what());
  }
  cfg.normalize();
  return cfg;
}

void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                     const ModelParameters& params, const nlohmann::json& metadata) {
  nlohmann::json directory = nlohmann::json::array();
  std::uint64_t offset = 0;
  const auto tensors = params.named();
  for (const auto& [name, t] : tensors) {
    directory.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += t.size() * 4;
  }
  const nlohmann::json header = {{"format_version", kCheckpointVersion},
                                 {"precision", "float32"},
                                 {"config", model_config_to_json(cfg)},
                                 {"tensors", directory},
                                 {"data_bytes", offset},
                                 {"metadata", metadata}};
  const std::string text = header.dump();
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ValidationError("cannot write checkpoint " + path);
  os.write(kMagic, 4);
  io::write_u64(os, text.size());
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, t] : tensors)
    for (double v : t.data()) io::write_f32(os, static_cast<float>(v));
  if (!os) throw ValidationError("failed writing checkpoint " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ValidationError("cannot open checkpoint " + path);
  char magic[4];
  if (!io::read_exact(is, magic, 4, "checkpoint magic") ||
      std::memcmp(magic, kMagic, 4) != 0) {
    throw CorruptFileError(path + ": bad magic (expected EMC1)");
  }
  const std::uint64_t header_len = io::read_u64(is, "checkpoint header length");
  if (header_len > (1u << 30)) throw CorruptFileError(path + ": implausible header length");
  std::string text(header_len, '\0');
  if (!io::read_exact(is, text.data(), header_len, "checkpoint header")) {
    throw CorruptFileError(path + ": truncated header");
  }
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(path + ": unreadable header: " + e.what());
  }

  Checkpoint ck;
  try {
    const int version = header.at("format_version").get<int>();
    if (version != kCheckpointVersion) {
      throw CorruptFileError(path + ": unsupported format_version " + std::to_string(version));
    }
    ck.config = model_config_from_json(header.at("config"));
    ck.metadata = header.value("metadata", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(path + ": bad header: " + e.what());
  } catch (const ValidationError& e) {
    throw CorruptFileError(path + ": bad config: " + e.what());
  }

  ck.params = init_parameters(ck.config, 0);
  const auto expected = ck.params.named();
  const nlohmann::json& directory = header.at("tensors");
  if (!directory.is_array() || directory.size() != expected.size()) {
    throw CorruptFileError(path + ": tensor directory has " +
                           std::to_string(directory.size()) + " entries, config implies " +
                           std::to_string(expected.size()));
  }
  std::uint64_t offset = 0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto& entry = directory[i];
    const auto& [name, tensor] = expected[i];
    Shape shape;
    try {
      if (entry.at("name").get<std::string>() != name) {
        throw CorruptFileError(path + ": tensor " + std::to_string(i) + " is '" +
                               entry.at("name").get<std::string>() + "', expected '" +
                               name + "'");
      }
      shape = entry.at("shape").get<Shape>();
      if (entry.at("offset").get<std::uint64_t>() != offset) {
        throw CorruptFileError(path + ": tensor '" + name + "' has a bad offset");
      }
    } catch (const nlohmann::json::exception& e) {
      throw CorruptFileError(path + ": bad tensor directory: " + e.what());
    }
    if (shape != tensor.shape()) {
      throw CorruptFileError(path + ": tensor '" + name + "' has shape " +
                             shape_string(shape) + ", config implies " +
                             shape_string(tensor.shape()));
    }
    Tensor handle = tensor;
    for (double& v : handle.mutable_data())
      v = static_cast<double>(io::read_f32(is, "tensor " + name));
    offset += tensor.size() * 4;
  }
  return ck;
}

}  // namespace emorec
