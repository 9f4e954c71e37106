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
#include <span>
#include <string>
#include <vector>

#include "emorec/feature_bundle.hpp"
#include "emorec/model.hpp"
#include "json.hpp"

namespace emorec {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 4);
  static ConfusionMatrix from_rows(const std::vector<std::vector<std::size_t>>& rows);

  void add(std::size_t truth, std::size_t predicted);
  std::size_t at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * n_ + predicted];
  }
  std::size_t classes() const { return n_; }
  std::size_t total() const;
  std::size_t row_total(std::size_t truth) const;
  std::size_t trace() const;

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix& other) const = default;

 private:
  std::size_t n_;
  std::vector<std::size_t> counts_;
};

// trace / total.
double weighted_accuracy(const ConfusionMatrix& cm);
// Mean per-class recall over classes that have at least one sample; empty
// rows are skipped with a warning.
double unweighted_accuracy(const ConfusionMatrix& cm);

struct Metrics {
  double wa = 0.0;
  double ua = 0.0;
};

Metrics compute_metrics(const ConfusionMatrix& cm);

struct FoldSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev;
  std::vector<std::size_t> test;
};

struct FoldPlan {
  std::vector<FoldSplit> folds;
};

// Stratified k-fold plan: each class is shuffled and dealt round-robin into
// n_folds blocks. Fold i tests on block i, validates on block (i + 1) mod
// n_folds and trains on the rest.
FoldPlan make_folds(std::span<const int> labels, std::size_t n_classes,
                    std::uint64_t seed, std::size_t n_folds = 10);

// Index of the largest entry, lowest index on ties.
std::size_t argmax(std::span<const double> values);

struct Evaluation {
  ConfusionMatrix confusion;
  Metrics metrics;
  std::vector<std::size_t> predicted;
};

Evaluation evaluate(const ModelConfig& cfg, const ModelParameters& params,
                    std::span<const FeatureBundle> samples);

struct FoldResult {
  std::size_t fold = 0;
  std::size_t run = 0;
  ConfusionMatrix confusion;
  Metrics metrics;
};

struct CrossValidationSummary {
  double wa_mean = 0.0, wa_std = 0.0;
  double ua_mean = 0.0, ua_std = 0.0;
  ConfusionMatrix pooled;
};

CrossValidationSummary summarize(std::span<const FoldResult> results);

// Human-readable report: per-fold metrics and confusion matrices, then the
// cross-fold mean and standard deviation.
std::string format_report(std::span<const FoldResult> results,
                          const std::vector<std::string>& class_names);
nlohmann::json summary_json(std::span<const FoldResult> results,
                            const std::vector<std::string>& class_names);

}  // namespace emorec
