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

// emorec: command-line entry point for the speech/text emotion classifier.
//
// Exit status: 0 on success, 1 for usage or validation errors, 2 for
// numerical failures and corrupt files.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "emorec/commands.hpp"
#include "emorec/error.hpp"
#include "json.hpp"

namespace {

using namespace emorec;

std::vector<PoolMode> parse_modes(const std::string& list) {
  std::vector<PoolMode> modes;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) modes.push_back(parse_pool_mode(item));
  }
  if (modes.empty()) throw ValidationError("empty pool mode list '" + list + "'");
  return modes;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config " + path);
  try {
    return nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

struct TrainFlags {
  std::string config, manifest, out, embeddings, features;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> fold, epochs, runs, threads;
  bool no_attention = false, no_xvector = false, no_swem = false;
  std::string audio_pool, text_pool;
};

RunConfig resolve_train_config(const TrainFlags& f) {
  nlohmann::json j = f.config.empty() ? nlohmann::json::object() : read_json(f.config);
  if (f.seed) j["seed"] = *f.seed;
  if (!j.contains("seed")) {
    throw ValidationError("a seed is required: set \"seed\" in the config or pass --seed");
  }
  RunConfig cfg = run_config_from_json(j);
  if (!f.manifest.empty()) cfg.manifest = f.manifest;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (!f.embeddings.empty()) cfg.embeddings = f.embeddings;
  if (!f.features.empty()) cfg.feature_cache = f.features;
  if (f.fold) cfg.fold = *f.fold;
  if (f.epochs) cfg.train.epochs = *f.epochs;
  if (f.runs) cfg.runs = *f.runs;
  if (f.threads) cfg.threads = *f.threads;
  if (f.no_attention) cfg.model.use_attention = false;
  if (f.no_xvector) cfg.model.use_xvector = false;
  if (f.no_swem) cfg.model.use_swem = false;
  if (!f.audio_pool.empty()) cfg.model.audio_pool_modes = parse_modes(f.audio_pool);
  if (!f.text_pool.empty()) cfg.model.text_pool_modes = parse_modes(f.text_pool);
  cfg.resolve();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bimodal speech emotion recognition: features, training and evaluation"};
  app.require_subcommand(1);

  SynthConfig synth;
  std::string synth_out;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic four-class corpus");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--n", synth.n_per_class, "Utterances per class");
  synth_cmd->add_option("--seed", synth.seed, "Random seed")->required();
  synth_cmd->add_option("--seconds", synth.seconds, "Clip length in seconds");
  synth_cmd->add_option("--xvector-dim", synth.xvector_dim, "x-vector dimension");

  std::string ex_manifest, ex_out, ex_config;
  std::size_t ex_threads = 0;
  auto* extract_cmd =
      app.add_subcommand("extract-features", "Compute acoustic features into an EMF1 cache");
  extract_cmd->add_option("--manifest", ex_manifest, "Manifest (JSON lines)")->required();
  extract_cmd->add_option("--out", ex_out, "Output feature file")->required();
  extract_cmd->add_option("--config", ex_config, "Run config supplying feature settings");
  extract_cmd->add_option("--threads", ex_threads, "Worker threads (0 = all cores)");

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Cross-validated training");
  train_cmd->add_option("--config", tf.config, "Run config (JSON)");
  train_cmd->add_option("--manifest", tf.manifest, "Manifest (JSON lines)");
  train_cmd->add_option("--out", tf.out, "Run directory");
  train_cmd->add_option("--seed", tf.seed, "Random seed");
  train_cmd->add_option("--fold", tf.fold, "Train and test only this fold");
  train_cmd->add_option("--epochs", tf.epochs, "Maximum number of epochs");
  train_cmd->add_option("--runs", tf.runs, "Repetitions with different seeds");
  train_cmd->add_option("--embeddings", tf.embeddings, "Word-vector text file");
  train_cmd->add_option("--features", tf.features, "EMF1 feature cache");
  train_cmd->add_option("--threads", tf.threads, "Feature extraction threads");
  train_cmd->add_flag("--no-attention", tf.no_attention, "Disable the attention block");
  train_cmd->add_flag("--no-xvector", tf.no_xvector, "Disable x-vector fusion");
  train_cmd->add_flag("--no-swem", tf.no_swem, "Disable SWEM features");
  train_cmd->add_option("--audio-pool", tf.audio_pool, "Audio pooling modes, e.g. max,avg,std");
  train_cmd->add_option("--text-pool", tf.text_pool, "Text pooling modes, e.g. max");

  std::string ev_checkpoint, ev_manifest, ev_out;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a manifest");
  eval_cmd->add_option("--checkpoint", ev_checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--manifest", ev_manifest, "Manifest (JSON lines)")->required();
  eval_cmd->add_option("--out", ev_out, "Directory for metrics.txt and metrics.json");

  std::string pr_checkpoint, pr_wav, pr_transcript;
  std::optional<std::string> pr_xvector;
  auto* predict_cmd = app.add_subcommand("predict", "Classify one utterance");
  predict_cmd->add_option("--checkpoint", pr_checkpoint, "Checkpoint file")->required();
  predict_cmd->add_option("--wav", pr_wav, "16 kHz mono PCM16 WAV")->required();
  predict_cmd->add_option("--transcript", pr_transcript, "Transcript text")->required();
  predict_cmd->add_option("--xvector", pr_xvector, "x-vector text file");

  std::uint64_t gc_seed = 0;
  std::string gc_config;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference gradient check");
  grad_cmd->add_option("--seed", gc_seed, "Random seed");
  grad_cmd->add_option("--config", gc_config, "Run config supplying the seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*synth_cmd) {
      cmd_synth(synth_out, synth, std::cout);
    } else if (*extract_cmd) {
      FeatureConfig features;
      if (!ex_config.empty()) features = load_run_config(ex_config).features;
      cmd_extract_features(ex_manifest, ex_out, features, ex_threads, std::cout);
    } else if (*train_cmd) {
      cmd_train(resolve_train_config(tf), std::cout, std::cerr);
    } else if (*eval_cmd) {
      cmd_eval(ev_checkpoint, ev_manifest, ev_out, std::cout);
    } else if (*predict_cmd) {
      cmd_predict(pr_checkpoint, pr_wav, pr_transcript, pr_xvector, std::cout);
    } else if (*grad_cmd) {
      std::uint64_t seed = gc_seed;
      if (!gc_config.empty() && grad_cmd->count("--seed") == 0) seed = load_run_config(gc_config).seed;
      const GradCheckResult r = cmd_gradcheck(seed, std::cout);
      if (!(r.max_rel_error < kGradCheckTolerance)) return 2;
    }
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
