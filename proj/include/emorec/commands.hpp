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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "emorec/data.hpp"
#include "emorec/evaluation.hpp"
#include "emorec/gradcheck.hpp"
#include "emorec/run_config.hpp"
#include "emorec/training.hpp"

namespace emorec {

// Pipeline steps behind the emorec subcommands. Progress goes to `log`,
// results to `out`. Failures surface as ValidationError (bad input) or
// NumericError (numerical breakdown, corrupt files).

std::vector<ManifestRecord> cmd_synth(const std::string& out_dir, const SynthConfig& cfg,
                                      std::ostream& out);

// Writes the unpadded frame features of every manifest record to an EMF1 file.
void cmd_extract_features(const std::string& manifest, const std::string& out_path,
                          const FeatureConfig& cfg, std::size_t threads, std::ostream& out);

struct TrainRun {
  std::vector<FoldResult> results;
  std::vector<std::vector<EpochLog>> histories;  // one per (run, fold)
};

// Cross-validated training. The run directory receives config.json, one
// tab-separated log and one checkpoint per (run, fold), metrics.txt and
// metrics.json.
TrainRun cmd_train(RunConfig cfg, std::ostream& out, std::ostream& log);

// Evaluates a checkpoint on every record of a manifest. When out_dir is
// non-empty the report is also written there.
Evaluation cmd_eval(const std::string& checkpoint, const std::string& manifest,
                    const std::string& out_dir, std::ostream& out);

// Class posterior for one utterance; prints one "class probability" line per
// class followed by the predicted label.
std::vector<double> cmd_predict(const std::string& checkpoint, const std::string& wav,
                                const std::string& transcript,
                                const std::optional<std::string>& xvector, std::ostream& out);

inline constexpr double kGradCheckTolerance = 1e-4;

GradCheckResult cmd_gradcheck(std::uint64_t seed, std::ostream& out);

}  // namespace emorec
