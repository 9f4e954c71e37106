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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "doctest.h"
#include "emorec/data.hpp"
#include "json.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  static int counter = 0;
  const fs::path log = oracle::temp_dir("cli_logs") / ("out" + std::to_string(counter++) + ".txt");
  const std::string cmd = std::string(EMOREC_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream is(log);
  r.output.assign(std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>());
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

// Small model so that a few epochs run in about a second.
nlohmann::json desk_config(const fs::path& manifest, const fs::path& out) {
  return {{"seed", 3},
          {"manifest", manifest.string()},
          {"out", out.string()},
          {"folds", 4},
          {"fold", 0},
          {"model", {{"filters_per_scale", 16}, {"xvector_dim", 32}, {"fc_hidden", 64}}},
          {"train", {{"batch_size", 8}, {"epochs", 40}, {"lr", 2e-3}, {"patience", 40}}},
          {"features", {{"max_audio_seconds", 1.0}, {"max_tokens", 16}}}};
}

struct Corpus {
  fs::path dir;
  fs::path manifest;
};

const Corpus& corpus() {
  static const Corpus c = [] {
    Corpus out;
    out.dir = oracle::temp_dir("cli_corpus");
    const RunResult r = run("synth --out " + out.dir.string() + " --n 8 --seed 4 --xvector-dim 32");
    REQUIRE(r.status == 0);
    out.manifest = out.dir / "manifest.jsonl";
    return out;
  }();
  return c;
}

std::string first_train_loss(const fs::path& log) {
  std::istringstream is(read_file(log));
  std::string header, line;
  std::getline(is, header);
  std::getline(is, line);
  return line.substr(line.find('\t') + 1, line.find('\t', line.find('\t') + 1) - line.find('\t') - 1);
}

}  // namespace

TEST_CASE("usage errors exit with status 1") {
  CHECK(run("").status == 1);
  CHECK(run("frobnicate").status == 1);
  CHECK(run("synth --out /tmp/x").status == 1);  // missing --seed
  CHECK(run("--help").status == 0);
  const RunResult r = run("train --manifest " + corpus().manifest.string());
  CHECK(r.status == 1);
  CHECK(r.output.find("seed") != std::string::npos);
  CHECK(run("eval --checkpoint /nonexistent.emc --manifest " + corpus().manifest.string()).status ==
        1);
}

TEST_CASE("gradcheck subcommand passes") {
  const RunResult r = run("gradcheck --seed 0");
  CHECK(r.status == 0);
  CHECK(r.output.find("PASS") != std::string::npos);
}

TEST_CASE("corrupt checkpoint exits with status 2") {
  const fs::path p = oracle::temp_dir("cli_corrupt") / "bad.emc";
  std::ofstream(p) << "EMC1garbage";
  CHECK(run("eval --checkpoint " + p.string() + " --manifest " + corpus().manifest.string())
            .status == 2);
}

TEST_CASE("train, predict, eval and reproduce from the config snapshot") {
  const fs::path out = oracle::temp_dir("cli_run");
  const fs::path cfg_path = out.parent_path() / "cli_run_config.json";
  std::ofstream(cfg_path) << desk_config(corpus().manifest, out).dump();
  RunResult r = run("train --config " + cfg_path.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  for (const char* name : {"config.json", "metrics.txt", "metrics.json", "run0_fold0.emc",
                           "run0_fold0_train.tsv"})
    CHECK(fs::exists(out / name));
  const fs::path ckpt = out / "run0_fold0.emc";

  // Predict every utterance of one class; the model should get them right.
  const auto records = emorec::load_manifest(corpus().manifest.string());
  std::size_t correct = 0, total = 0;
  for (const auto& rec : records) {
    if (rec.label != 2) continue;
    r = run("predict --checkpoint " + ckpt.string() + " --wav " + rec.wav_path +
            " --transcript '" + rec.transcript + "' --xvector " + *rec.xvector_path);
    REQUIRE_MESSAGE(r.status == 0, r.output);
    ++total;
    correct += r.output.find("label sad") != std::string::npos;
  }
  CHECK(correct == total);

  r = run("eval --checkpoint " + ckpt.string() + " --manifest " + corpus().manifest.string());
  CHECK(r.status == 0);
  CHECK(r.output.find("WA") != std::string::npos);

  // A manifest without x-vectors cannot feed a model that fuses them.
  std::vector<emorec::ManifestRecord> stripped = records;
  for (auto& rec : stripped) rec.xvector_path.reset();
  const fs::path no_xv = out / "no_xvector.jsonl";
  emorec::write_manifest(no_xv.string(), stripped);
  r = run("eval --checkpoint " + ckpt.string() + " --manifest " + no_xv.string());
  CHECK(r.status == 1);
  CHECK(r.output.find("xvector") != std::string::npos);

  // The snapshot alone reproduces the run.
  const fs::path rerun = oracle::temp_dir("cli_rerun");
  r = run("train --config " + (out / "config.json").string() + " --out " + rerun.string() +
          " --epochs 1");
  REQUIRE_MESSAGE(r.status == 0, r.output);
  CHECK(first_train_loss(rerun / "run0_fold0_train.tsv") ==
        first_train_loss(out / "run0_fold0_train.tsv"));
}

TEST_CASE("extract-features writes a cache that train accepts") {
  const fs::path dir = oracle::temp_dir("cli_features");
  const fs::path cfg_path = dir / "config.json";
  nlohmann::json cfg = desk_config(corpus().manifest, dir / "run");
  cfg["train"]["epochs"] = 1;
  std::ofstream(cfg_path) << cfg.dump();
  RunResult r = run("extract-features --manifest " + corpus().manifest.string() + " --out " +
                    (dir / "feats.emf").string() + " --config " + cfg_path.string());
  REQUIRE_MESSAGE(r.status == 0, r.output);
  r = run("train --config " + cfg_path.string() + " --features " + (dir / "feats.emf").string());
  CHECK_MESSAGE(r.status == 0, r.output);
  CHECK(run("train --config " + cfg_path.string() + " --no-xvector --audio-pool max,bogus")
            .status == 1);
}
