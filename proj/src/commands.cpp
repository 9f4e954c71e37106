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

#include "emorec/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <thread>

#include "emorec/checkpoint.hpp"
#include "emorec/error.hpp"
#include "emorec/feature_file.hpp"
#include "emorec/wav.hpp"

namespace fs = std::filesystem;

namespace emorec {

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << text;
  if (!os) throw ValidationError("failed writing " + path.string());
}

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<FeatureBundle> load_bundles(const RunConfig& cfg,
                                        const std::vector<ManifestRecord>& records,
                                        const FeatureExtractor& extractor) {
  if (cfg.feature_cache.empty()) return extract_all(records, extractor, cfg.threads);
  std::map<std::string, FeatureMatrix> cached;
  for (FeatureRecord& r : read_feature_file(cfg.feature_cache))
    cached.emplace(r.id, std::move(r.features));
  std::vector<FeatureBundle> out;
  out.reserve(records.size());
  for (const ManifestRecord& r : records) {
    const auto it = cached.find(r.id);
    if (it == cached.end()) {
      throw ValidationError("record " + r.id + " is missing from feature cache " +
                            cfg.feature_cache);
    }
    out.push_back(extractor.from_features(r, it->second));
  }
  return out;
}

std::vector<FeatureBundle> subset(const std::vector<FeatureBundle>& all,
                                  const std::vector<std::size_t>& idx) {
  std::vector<FeatureBundle> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

struct LoadedModel {
  Checkpoint ck;
  FeatureExtractor extractor;
};

LoadedModel load_model(const std::string& checkpoint) {
  Checkpoint ck = load_checkpoint(checkpoint);
  FeatureConfig features;
  Vocabulary vocab;
  try {
    features = feature_config_from_json(ck.metadata.at("features"));
    vocab = Vocabulary::from_tokens(ck.metadata.at("vocabulary").get<std::vector<std::string>>());
  } catch (const nlohmann::json::exception& e) {
    throw CorruptFileError(checkpoint + ": metadata lacks feature settings: " + e.what());
  }
  features.xvector_dim = ck.config.xvector_dim;
  if (vocab.size() != ck.config.vocab_size) {
    throw CorruptFileError(checkpoint + ": vocabulary has " + std::to_string(vocab.size()) +
                           " entries, model vocab_size is " +
                           std::to_string(ck.config.vocab_size));
  }
  if (features.mfcc.feature_dim() != ck.config.audio_dim) {
    throw CorruptFileError(checkpoint + ": feature settings give " +
                           std::to_string(features.mfcc.feature_dim()) +
                           " audio features, model audio_dim is " +
                           std::to_string(ck.config.audio_dim));
  }
  FeatureExtractor extractor(features, std::move(vocab));
  return {std::move(ck), std::move(extractor)};
}

}  // namespace

std::vector<ManifestRecord> cmd_synth(const std::string& out_dir, const SynthConfig& cfg,
                                      std::ostream& out) {
  std::vector<ManifestRecord> records = synth_dataset(out_dir, cfg);
  out << "wrote " << records.size() << " utterances to "
      << (fs::path(out_dir) / "manifest.jsonl").string() << '\n';
  return records;
}

void cmd_extract_features(const std::string& manifest, const std::string& out_path,
                          const FeatureConfig& cfg, std::size_t threads, std::ostream& out) {
  cfg.validate();
  const std::vector<ManifestRecord> records = load_manifest(manifest);
  std::vector<FeatureRecord> features(records.size());
  std::vector<std::exception_ptr> errors(records.size());
  // Same worker layout as extract_all, but keeping the unpadded matrices.
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      try {
        features[i] = {records[i].id, compute_features(load_wav(records[i].wav_path), cfg.mfcc)};
      } catch (const Error& e) {
        errors[i] = std::make_exception_ptr(ValidationError("record " + records[i].id + ": " + e.what()));
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < std::min(threads, records.size()); ++t) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);
  write_feature_file(out_path, features);
  out << "wrote features of " << features.size() << " utterances to " << out_path << '\n';
}

TrainRun cmd_train(RunConfig cfg, std::ostream& out, std::ostream& log) {
  if (cfg.manifest.empty()) throw ValidationError("no manifest given");
  if (cfg.out_dir.empty()) throw ValidationError("no run directory given");
  const std::vector<ManifestRecord> records = load_manifest(cfg.manifest);
  Vocabulary vocab = build_vocabulary(records, cfg.features);
  cfg.model.vocab_size = vocab.size();
  cfg.resolve();

  fs::create_directories(cfg.out_dir);
  const fs::path dir(cfg.out_dir);
  write_text(dir / "config.json", run_config_to_json(cfg).dump(2) + "\n");

  const FeatureExtractor extractor(cfg.features, vocab);
  const std::vector<FeatureBundle> bundles = load_bundles(cfg, records, extractor);
  for (const FeatureBundle& b : bundles) check_bundle(b, cfg.model);

  std::vector<int> labels;
  for (const ManifestRecord& r : records) labels.push_back(r.label);
  const FoldPlan plan = make_folds(labels, kNumClasses, cfg.seed, cfg.n_folds);

  std::optional<EmbeddingTable> pretrained;
  TrainRun result;
  for (std::size_t run = 0; run < cfg.runs; ++run) {
    for (std::size_t fold = 0; fold < cfg.n_folds; ++fold) {
      if (cfg.fold && *cfg.fold != fold) continue;
      const std::uint64_t seed = cfg.seed + 7919 * run + fold;
      ModelParameters params = init_parameters(cfg.model, seed);
      if (!cfg.embeddings.empty()) {
        set_embeddings(params, cfg.model,
                       load_embeddings(cfg.embeddings, vocab, seed, cfg.model.text_dim));
      }
      TrainConfig tcfg = cfg.train;
      tcfg.seed = seed;

      const FoldSplit& split = plan.folds[fold];
      const std::vector<FeatureBundle> train = subset(bundles, split.train);
      const std::vector<FeatureBundle> dev = subset(bundles, split.dev);
      const std::vector<FeatureBundle> test = subset(bundles, split.test);

      const std::string stem = "run" + std::to_string(run) + "_fold" + std::to_string(fold);
      std::ofstream tsv(dir / (stem + "_train.tsv"));
      if (!tsv) throw ValidationError("cannot write training log in " + cfg.out_dir);
      tsv << "epoch\ttrain_loss\tdev_wa\tdev_ua\n";
      const auto t0 = std::chrono::steady_clock::now();
      const FitResult fitted =
          fit(cfg.model, std::move(params), train, dev, tcfg, [&](const EpochLog& e) {
            tsv << e.epoch << '\t' << exact(e.train_loss) << '\t' << exact(e.dev_wa) << '\t'
                << exact(e.dev_ua) << '\n';
            tsv.flush();
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            log << stem << " epoch " << e.epoch << " loss " << std::fixed << std::setprecision(4)
                << e.train_loss << " dev WA " << e.dev_wa << " UA " << e.dev_ua << " ("
                << std::setprecision(1) << secs << " s)" << std::defaultfloat << '\n';
          });

      const Evaluation ev = evaluate(cfg.model, fitted.best, test);
      result.results.push_back({fold, run, ev.confusion, ev.metrics});
      result.histories.push_back(fitted.history);
      const nlohmann::json meta = {{"features", feature_config_to_json(cfg.features)},
                                   {"vocabulary", vocab.tokens()},
                                   {"seed", seed},
                                   {"run", run},
                                   {"fold", fold},
                                   {"best_epoch", fitted.best_epoch},
                                   {"dev_wa", fitted.best_dev_wa},
                                   {"test_wa", ev.metrics.wa},
                                   {"test_ua", ev.metrics.ua}};
      save_checkpoint((dir / (stem + ".emc")).string(), cfg.model, fitted.best, meta);
      out << stem << ": best epoch " << fitted.best_epoch << ", test WA " << std::fixed
          << std::setprecision(4) << ev.metrics.wa << " UA " << ev.metrics.ua
          << std::defaultfloat << '\n';
    }
  }
  const std::vector<std::string> names = class_names();
  const std::string report = format_report(result.results, names);
  write_text(dir / "metrics.txt", report);
  write_text(dir / "metrics.json", summary_json(result.results, names).dump(2) + "\n");
  out << report;
  return result;
}

Evaluation cmd_eval(const std::string& checkpoint, const std::string& manifest,
                    const std::string& out_dir, std::ostream& out) {
  const LoadedModel m = load_model(checkpoint);
  const std::vector<ManifestRecord> records = load_manifest(manifest);
  const std::vector<FeatureBundle> bundles = extract_all(records, m.extractor);
  for (const FeatureBundle& b : bundles) check_bundle(b, m.ck.config);
  const Evaluation ev = evaluate(m.ck.config, m.ck.params, bundles);
  const std::vector<FoldResult> results = {{0, 0, ev.confusion, ev.metrics}};
  const std::vector<std::string> names = class_names();
  const std::string report = format_report(results, names);
  out << report;
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_text(fs::path(out_dir) / "metrics.txt", report);
    write_text(fs::path(out_dir) / "metrics.json", summary_json(results, names).dump(2) + "\n");
  }
  return ev;
}

std::vector<double> cmd_predict(const std::string& checkpoint, const std::string& wav,
                                const std::string& transcript,
                                const std::optional<std::string>& xvector, std::ostream& out) {
  const LoadedModel m = load_model(checkpoint);
  ManifestRecord r;
  r.id = fs::path(wav).stem().string();
  r.wav_path = wav;
  r.transcript = transcript;
  r.asr_transcript = transcript;
  r.xvector_path = xvector;
  const FeatureBundle b = m.extractor.extract(r);
  const std::vector<double> probs = predict_probs(b, m.ck.config, m.ck.params);
  for (std::size_t c = 0; c < probs.size(); ++c)
    out << kClassNames[c] << ' ' << std::fixed << std::setprecision(6) << probs[c] << '\n';
  out << "label " << kClassNames[argmax(probs)] << '\n';
  return probs;
}

GradCheckResult cmd_gradcheck(std::uint64_t seed, std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const GradCheckResult r = run_gradcheck(seed);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out << "checked " << r.checked << " parameters in " << std::setprecision(3) << secs << " s\n"
      << "max relative error " << std::scientific << r.max_rel_error << " at "
      << r.worst_tensor << '[' << r.worst_index << "] (analytic " << r.worst_analytic
      << ", numeric " << r.worst_numeric << ")" << std::defaultfloat << '\n'
      << (r.max_rel_error < kGradCheckTolerance ? "PASS" : "FAIL") << '\n';
  return r;
}

}  // namespace emorec
