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
#include <string>

#include "emorec/feature_bundle.hpp"
#include "emorec/model.hpp"

namespace emorec {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// Small configuration with every block enabled (two kernel sizes per branch,
// 4 filters, x-vectors, attention, statistical pooling and SWEM).
ModelConfig tiny_model_config();
// Random inputs for tiny_model_config: 10 frames, 5 tokens, with some
// padding at the end of both sequences.
FeatureBundle tiny_bundle(const ModelConfig& cfg, std::uint64_t seed);

// Compares the analytic gradient of the training-mode cross-entropy of one
// sample against central finite differences for every parameter entry.
// Dropout uses a fixed mask. The relative error of a pair (a, n) is
// |a - n| / max(|a|, |n|, 1e-8).
GradCheckResult gradient_check(const ModelConfig& cfg, const ModelParameters& params,
                               const FeatureBundle& bundle, std::uint64_t dropout_seed,
                               double step = 1e-5);

// tiny_model_config, seeded parameters and inputs.
GradCheckResult run_gradcheck(std::uint64_t seed);

}  // namespace emorec
