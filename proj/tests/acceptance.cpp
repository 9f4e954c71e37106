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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "emorec/checkpoint.hpp"
#include "emorec/commands.hpp"
#include "emorec/data.hpp"
#include "emorec/evaluation.hpp"
#include "emorec/gradcheck.hpp"
#include "emorec/mfcc.hpp"
#include "emorec/model.hpp"
#include "emorec/training.hpp"
#include "oracles.hpp"

using namespace emorec;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Dataset {
  std::vector<FeatureBundle> bundles;
  std::size_t vocab_size = 0;
};

Dataset synthetic(const std::string& name, std::size_t per_class, std::uint64_t seed,
                  std::size_t xvector_dim, std::size_t max_tokens) {
  SynthConfig sc;
  sc.n_per_class = per_class;
  sc.seed = seed;
  sc.xvector_dim = xvector_dim;
  const auto records = synth_dataset(oracle::temp_dir(name).string(), sc);
  FeatureConfig fc;
  fc.max_audio_seconds = 1.0;
  fc.max_tokens = max_tokens;
  fc.xvector_dim = xvector_dim;
  const FeatureExtractor ex(fc, build_vocabulary(records, fc));
  return {extract_all(records, ex), ex.vocabulary().size()};
}

ModelConfig desk_model(std::size_t vocab_size) {
  ModelConfig cfg;
  cfg.filters_per_scale = 16;
  cfg.xvector_dim = 32;
  cfg.fc_hidden = 64;
  cfg.audio_dim = 96;
  cfg.vocab_size = vocab_size;
  cfg.normalize();
  return cfg;
}

std::vector<FeatureBundle> pick(const std::vector<FeatureBundle>& all,
                                const std::vector<std::size_t>& idx) {
  std::vector<FeatureBundle> out;
  for (std::size_t i : idx) out.push_back(all[i]);
  return out;
}

std::vector<int> labels_of(const std::vector<FeatureBundle>& b) {
  std::vector<int> out;
  for (const auto& x : b) out.push_back(x.label);
  return out;
}

// 1. Finite-difference check of the whole tiny model.
Outcome gradient_integrity() {
  const auto t0 = Clock::now();
  const GradCheckResult r = run_gradcheck(0);
  const double secs = seconds_since(t0);
  return {r.max_rel_error < 1e-4 && secs < 60.0,
          "max rel error " + fmt("%.3g", r.max_rel_error) + " over " +
              std::to_string(r.checked) + " entries in " + fmt("%.2f", secs) + " s"};
}

// 2. Library ops against literal loops.
Outcome formula_oracles() {
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  const std::vector<PoolMode> all = {PoolMode::kMax, PoolMode::kAvg, PoolMode::kStd};
  const int instances = 120;
  for (int n = 0; n < instances; ++n) {
    const std::size_t L = 1 + rng() % 12, D = 1 + rng() % 7, F = 1 + rng() % 5,
                      s = 1 + rng() % 6;
    const Tensor x = oracle::random_tensor({L, D}, rng);
    const Tensor k = oracle::random_tensor({F, s, D}, rng);
    const Tensor b = oracle::random_tensor({F}, rng);
    Graph g(false);
    const Tensor y = conv_full_width(g, x, k, b);
    const auto want = oracle::conv(oracle::to_matrix(x), k, b);
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t f = 0; f < F; ++f)
        worst = std::max(worst, std::abs(y[i * F + f] - want[i][f]));

    const std::size_t valid = 1 + rng() % L;
    const auto ym = oracle::to_matrix(y);
    std::vector<double> spu_want;
    for (PoolMode m : all) {
      const Tensor p = global_pool_time(g, y, m, valid);
      const auto pw = oracle::pool(ym, m, valid);
      worst = std::max(worst, oracle::max_abs_diff(std::vector<double>(p.data().begin(), p.data().end()), pw));
      spu_want.insert(spu_want.end(), pw.begin(), pw.end());
    }
    const Tensor spu = spu_forward(g, y, all, valid);
    worst = std::max(worst, oracle::max_abs_diff(
                                std::vector<double>(spu.data().begin(), spu.data().end()), spu_want));

    std::vector<Tensor> ctx;
    std::vector<std::vector<double>> ctx_plain;
    for (std::size_t c = 0, n_ctx = 1 + rng() % 3; c < n_ctx; ++c) {
      ctx.push_back(oracle::random_tensor({F}, rng));
      ctx_plain.emplace_back(ctx.back().data().begin(), ctx.back().data().end());
    }
    const AttentionResult att = attention_forward(g, y, ctx, valid);
    const auto aw = oracle::attention(ym, ctx_plain, valid);
    worst = std::max(worst, oracle::max_abs_diff(
                                std::vector<double>(att.attended.data().begin(), att.attended.data().end()),
                                aw.attended));
    for (std::size_t c = 0; c < ctx.size(); ++c)
      worst = std::max(worst, oracle::max_abs_diff(att.weights[c], aw.weights[c]));
  }
  return {worst <= 1e-12,
          std::to_string(instances) + " instances, max abs deviation " + fmt("%.3g", worst)};
}

// 3. Attention weights over randomized valid lengths.
Outcome attention_normalization() {
  std::mt19937_64 rng(31);
  double worst_sum = 0.0;
  bool zeros = true;
  for (int n = 0; n < 200; ++n) {
    const std::size_t rows = 1 + rng() % 20, ch = 1 + rng() % 8, valid = 1 + rng() % rows;
    const Tensor h = oracle::random_tensor({rows, ch}, rng, false, 3.0);
    std::vector<Tensor> ctx;
    for (int c = 0; c < 3; ++c) ctx.push_back(oracle::random_tensor({ch}, rng));
    Graph g(false);
    const AttentionResult r = attention_forward(g, h, ctx, valid);
    for (const auto& w : r.weights) {
      double s = 0.0;
      for (std::size_t k = 0; k < rows; ++k) {
        s += w[k];
        if (k >= valid && w[k] != 0.0) zeros = false;
      }
      worst_sum = std::max(worst_sum, std::abs(s - 1.0));
    }
  }
  return {worst_sum <= 1e-9 && zeros, "max |sum - 1| " + fmt("%.3g", worst_sum) +
                                          (zeros ? ", padding weights exactly 0"
                                                 : ", nonzero weight on padding")};
}

// 4. Extra padding frames and tokens must not move the posterior.
Outcome padding_invariance() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ModelConfig cfg = tiny_model_config();
    const ModelParameters p = init_parameters(cfg, seed);
    const FeatureBundle b = tiny_bundle(cfg, seed + 100);
    FeatureBundle padded = b;
    const std::size_t extra_frames = 1 + seed % 9, extra_tokens = 1 + seed % 7;
    padded.mfcc.resize((b.audio_frames + extra_frames) * b.audio_dim, 0.0f);
    padded.audio_frames += extra_frames;
    padded.tokens.resize(b.tokens.size() + extra_tokens, Vocabulary::kPadding);
    worst = std::max(worst, oracle::max_abs_diff(predict_probs(b, cfg, p),
                                                 predict_probs(padded, cfg, p)));
  }
  return {worst < 1e-12, "max posterior change " + fmt("%.3g", worst)};
}

// 5. Full-size model memorizes 8 utterances per class.
Outcome overfit() {
  const auto t0 = Clock::now();
  const Dataset data = synthetic("acc_overfit", 8, 1, 512, 128);
  ModelConfig cfg;
  cfg.audio_dim = 96;
  cfg.vocab_size = data.vocab_size;
  cfg.dropout = 0.3;
  cfg.normalize();
  TrainConfig tcfg;
  tcfg.lr = 5e-4;
  tcfg.clip_norm = 1.0;
  tcfg.batch_size = 8;
  tcfg.seed = 1;
  ModelParameters params = init_parameters(cfg, tcfg.seed);
  AdamState state;
  std::mt19937_64 rng(tcfg.seed);
  double wa = 0.0;
  std::size_t epoch = 0;
  while (epoch < 300 && wa < 0.95) {
    ++epoch;
    train_epoch(cfg, params, data.bundles, tcfg, state, rng);
    wa = evaluate(cfg, params, data.bundles).metrics.wa;
  }
  const double secs = seconds_since(t0);
  return {wa >= 0.95 && secs < 300.0, "train WA " + fmt("%.4f", wa) + " after " +
                                          std::to_string(epoch) + " epoch(s), " +
                                          fmt("%.1f", secs) + " s"};
}

// Shared by criteria 6 and 7: 100 utterances per class, fold 0 of 10.
struct FoldData {
  std::size_t vocab_size = 0;
  std::vector<FeatureBundle> train, dev, test;
};

const FoldData& fold_data() {
  static const FoldData fd = [] {
    const Dataset data = synthetic("acc_fold", 100, 6, 32, 16);
    const FoldPlan plan = make_folds(labels_of(data.bundles), kNumClasses, 6);
    const FoldSplit& split = plan.folds[0];
    return FoldData{data.vocab_size, pick(data.bundles, split.train),
                    pick(data.bundles, split.dev), pick(data.bundles, split.test)};
  }();
  return fd;
}

TrainConfig desk_train(std::size_t epochs, std::uint64_t seed) {
  TrainConfig t;
  t.batch_size = 16;
  t.lr = 1e-3;
  t.epochs = epochs;
  t.patience = epochs;
  t.seed = seed;
  return t;
}

double fold_test_wa(const ModelConfig& cfg, std::size_t epochs, std::uint64_t seed) {
  const FoldData& fd = fold_data();
  const FitResult r = fit(cfg, init_parameters(cfg, seed), fd.train, fd.dev,
                          desk_train(epochs, seed));
  return evaluate(cfg, r.best, fd.test).metrics.wa;
}

// 6. Held-out accuracy on one fold.
Outcome generalization() {
  const auto t0 = Clock::now();
  const double wa = fold_test_wa(desk_model(fold_data().vocab_size), 15, 6);
  return {wa >= 0.80, "test WA " + fmt("%.4f", wa) + " on " +
                          std::to_string(fold_data().test.size()) + " held-out utterances, " +
                          fmt("%.1f", seconds_since(t0)) + " s"};
}

// 7. Every ablation trains and evaluates; the full model is not beaten by
// the max-pool-only audio variant.
Outcome ablations() {
  const std::size_t vocab = fold_data().vocab_size;
  struct Variant {
    std::string name;
    std::function<void(ModelConfig&)> apply;
  };
  const std::vector<Variant> variants = {
      {"full", [](ModelConfig&) {}},
      {"no-attention", [](ModelConfig& c) { c.use_attention = false; }},
      {"no-xvector", [](ModelConfig& c) { c.use_xvector = false; }},
      {"text-max-only", [](ModelConfig& c) { c.text_pool_modes = {PoolMode::kMax}; }},
      {"no-swem", [](ModelConfig& c) { c.use_swem = false; }},
      {"audio-max-only", [](ModelConfig& c) { c.audio_pool_modes = {PoolMode::kMax}; }},
  };
  std::ostringstream detail;
  double full = 0.0, audio_max = 0.0;
  for (const Variant& v : variants) {
    ModelConfig cfg = desk_model(vocab);
    v.apply(cfg);
    cfg.normalize();
    double wa = 0.0;
    try {
      wa = fold_test_wa(cfg, 5, 7);
    } catch (const std::exception& e) {
      return {false, v.name + " failed: " + e.what()};
    }
    if (v.name == "full") full = wa;
    if (v.name == "audio-max-only") audio_max = wa;
    detail << v.name << ' ' << fmt("%.3f", wa) << "; ";
  }
  return {full >= audio_max, detail.str() + "full >= audio-max-only"};
}

// 8. Metric values that can be worked out by hand.
Outcome metric_oracle() {
  const ConfusionMatrix cm = ConfusionMatrix::from_rows({{3, 1}, {1, 1}});
  const Metrics m = compute_metrics(cm);
  bool ok = m.wa == 4.0 / 6.0 && m.ua == 0.625;
  const Metrics m2 =
      compute_metrics(ConfusionMatrix::from_rows({{5, 0, 0}, {2, 3, 0}, {0, 0, 0}}));
  ok = ok && m2.wa == 0.8 && m2.ua == 0.8;
  std::mt19937_64 rng(8);
  std::size_t balanced = 0;
  for (int n = 0; n < 500; ++n) {
    const std::size_t k = 2 + rng() % 6, per = 1 + rng() % 200;
    ConfusionMatrix c(k);
    for (std::size_t t = 0; t < k; ++t)
      for (std::size_t i = 0; i < per; ++i) c.add(t, rng() % k);
    const Metrics bm = compute_metrics(c);
    balanced += bm.wa == bm.ua;
  }
  ok = ok && balanced == 500;
  return {ok, "[[3,1],[1,1]] -> WA " + fmt("%.17g", m.wa) + ", UA " + fmt("%.17g", m.ua) +
                  "; WA == UA on " + std::to_string(balanced) + "/500 balanced matrices"};
}

// 9. Front-end checks.
Outcome dsp_checks() {
  const MfccConfig cfg;
  std::vector<std::string> failed;
  if (num_frames(16000, cfg) != 98) failed.push_back("frame count");

  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss;
  double fft_err = 0.0, parseval = 0.0;
  for (std::size_t n : {2u, 16u, 128u, 512u, 1024u}) {
    std::vector<std::complex<double>> x(n);
    double energy = 0.0;
    for (auto& v : x) {
      v = {gauss(rng), gauss(rng)};
      energy += std::norm(v);
    }
    const auto want = oracle::dft(x);
    auto got = x;
    fft(got);
    double scale = 0.0, err = 0.0, spec_energy = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      scale = std::max(scale, std::abs(want[k]));
      err = std::max(err, std::abs(got[k] - want[k]));
      spec_energy += std::norm(got[k]);
    }
    fft_err = std::max(fft_err, err / scale);
    parseval = std::max(parseval, std::abs(spec_energy / static_cast<double>(n) - energy) / energy);
  }
  if (fft_err > 1e-9) failed.push_back("fft");
  if (parseval > 1e-9) failed.push_back("parseval");

  FeatureMatrix constant(50, 4);
  for (std::size_t t = 0; t < 50; ++t)
    for (std::size_t j = 0; j < 4; ++j) constant.at(t, j) = 1.5 * static_cast<double>(j) - 2.0;
  const FeatureMatrix d = delta(constant, cfg.delta_window);
  for (std::size_t t = 0; t < d.rows; ++t)
    for (std::size_t j = 0; j < d.cols; ++j)
      if (d.at(t, j) != 0.0) failed.push_back("delta of constant");

  WaveformBuffer tone;
  for (int t = 0; t < 16000; ++t)
    tone.samples.push_back(static_cast<float>(0.5 * std::sin(2.0 * std::numbers::pi * 1000.0 * t / 16000.0)));
  const FeatureMatrix e = mel_energies(tone, cfg);
  const auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  const double step = mel(cfg.fmax) / static_cast<double>(cfg.n_mels + 1);
  std::size_t expected = 0;
  for (std::size_t m = 1; m < cfg.n_mels; ++m)
    if (std::abs(step * static_cast<double>(m + 1) - mel(1000.0)) <
        std::abs(step * static_cast<double>(expected + 1) - mel(1000.0)))
      expected = m;
  for (std::size_t t = 0; t < e.rows; ++t) {
    std::size_t arg = 0;
    for (std::size_t m = 1; m < e.cols; ++m)
      if (e.at(t, m) > e.at(t, arg)) arg = m;
    if (arg != expected) {
      failed.push_back("1 kHz filter");
      break;
    }
  }
  std::string detail = "98 frames per second, fft rel err " + fmt("%.3g", fft_err) +
                       ", parseval rel err " + fmt("%.3g", parseval) + ", 1 kHz in filter " +
                       std::to_string(expected);
  for (const auto& f : failed) detail += "; FAILED " + f;
  return {failed.empty(), detail};
}

// 10. Bit-exact reruns and checkpoint round trip.
Outcome determinism() {
  const Dataset data = synthetic("acc_determinism", 12, 10, 32, 16);
  const FoldPlan plan = make_folds(labels_of(data.bundles), kNumClasses, 10, 4);
  const auto train = pick(data.bundles, plan.folds[0].train);
  const auto dev = pick(data.bundles, plan.folds[0].dev);
  const auto test = pick(data.bundles, plan.folds[0].test);
  const ModelConfig cfg = desk_model(data.vocab_size);
  const TrainConfig tcfg = desk_train(4, 10);
  const FitResult a = fit(cfg, init_parameters(cfg, 10), train, dev, tcfg);
  const FitResult b = fit(cfg, init_parameters(cfg, 10), train, dev, tcfg);
  bool same_losses = a.history.size() == b.history.size();
  for (std::size_t i = 0; same_losses && i < a.history.size(); ++i)
    same_losses = a.history[i].train_loss == b.history[i].train_loss;

  ModelParameters params = a.best.clone();
  params.round_to_float();
  const Evaluation before = evaluate(cfg, params, test);
  std::vector<std::vector<double>> probs_before;
  for (const auto& s : test) probs_before.push_back(predict_probs(s, cfg, params));
  const std::string path = (oracle::temp_dir("acc_ckpt") / "model.emc").string();
  save_checkpoint(path, cfg, params);
  const Checkpoint ck = load_checkpoint(path);
  const Evaluation after = evaluate(ck.config, ck.params, test);
  bool same_eval = before.metrics.wa == after.metrics.wa && before.metrics.ua == after.metrics.ua &&
                   before.confusion == after.confusion;
  for (std::size_t i = 0; i < test.size(); ++i)
    same_eval = same_eval && predict_probs(test[i], ck.config, ck.params) == probs_before[i];
  return {same_losses && same_eval,
          std::string(same_losses ? "loss trajectories identical" : "loss trajectories differ") +
              " over " + std::to_string(a.history.size()) + " epochs; " +
              (same_eval ? "reloaded checkpoint reproduces metrics and posteriors bit-exactly"
                         : "reloaded checkpoint differs")};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient integrity", gradient_integrity},
      {"formula oracles", formula_oracles},
      {"attention normalization and masking", attention_normalization},
      {"padding invariance", padding_invariance},
      {"overfit check", overfit},
      {"generalization smoke test", generalization},
      {"ablation closure", ablations},
      {"metric oracle", metric_oracle},
      {"DSP checks", dsp_checks},
      {"determinism and serialization", determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << "criterion " << i + 1 << " (" << criteria[i].first
              << "): " << (o.pass ? "PASS" : "FAIL") << "  " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
