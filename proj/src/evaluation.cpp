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

#include "emorec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <random>
#include <sstream>

#include "emorec/error.hpp"

namespace emorec {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes)
    : n_(n_classes), counts_(n_classes * n_classes, 0) {}

ConfusionMatrix ConfusionMatrix::from_rows(
    const std::vector<std::vector<std::size_t>>& rows) {
  ConfusionMatrix cm(rows.size());
  for (std::size_t t = 0; t < rows.size(); ++t) {
    if (rows[t].size() != rows.size()) {
      throw ValidationError("confusion matrix must be square");
    }
    for (std::size_t p = 0; p < rows.size(); ++p) cm.counts_[t * cm.n_ + p] = rows[t][p];
  }
  return cm;
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted) {
  if (truth >= n_ || predicted >= n_) {
    throw ValidationError("confusion matrix: class index out of range");
  }
  ++counts_[truth * n_ + predicted];
}

std::size_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t ConfusionMatrix::row_total(std::size_t truth) const {
  std::size_t s = 0;
  for (std::size_t p = 0; p < n_; ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, i);
  return s;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw ValidationError("confusion matrix sizes differ");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

double weighted_accuracy(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw ValidationError("weighted accuracy of an empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double unweighted_accuracy(const ConfusionMatrix& cm) {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> hits;
  for (std::size_t c = 0; c < cm.classes(); ++c) {
    const std::size_t row = cm.row_total(c);
    if (row == 0) {
      log_warning("class " + std::to_string(c) +
                  " has no samples; excluded from unweighted accuracy");
      continue;
    }
    rows.push_back(row);
    hits.push_back(cm.at(c, c));
  }
  if (rows.empty()) throw ValidationError("unweighted accuracy of an empty confusion matrix");

  // Sum the per-class recalls over a common denominator so the result is a
  // single rounded division; with balanced rows this is exactly trace/total.
  constexpr std::uint64_t kExact = std::uint64_t{1} << 53;
  std::uint64_t denom = 1;
  bool exact = true;
  for (std::size_t r : rows) {
    const std::uint64_t step = r / std::gcd(denom, static_cast<std::uint64_t>(r));
    if (denom > kExact / step) {
      exact = false;
      break;
    }
    denom *= step;
  }
  if (exact && denom <= kExact / rows.size()) {
    std::uint64_t num = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) num += hits[i] * (denom / rows[i]);
    return static_cast<double>(num) / static_cast<double>(denom * rows.size());
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    acc += static_cast<double>(hits[i]) / static_cast<double>(rows[i]);
  return acc / static_cast<double>(rows.size());
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  return {weighted_accuracy(cm), unweighted_accuracy(cm)};
}

FoldPlan make_folds(std::span<const int> labels, std::size_t n_classes,
                    std::uint64_t seed, std::size_t n_folds) {
  if (n_folds < 3) throw ValidationError("need at least 3 folds");
  std::vector<std::vector<std::size_t>> by_class(n_classes);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= n_classes) {
      throw ValidationError("sample " + std::to_string(i) + " has label " +
                            std::to_string(labels[i]) + " outside [0, " +
                            std::to_string(n_classes) + ")");
    }
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  for (std::size_t c = 0; c < n_classes; ++c) {
    if (by_class[c].size() < n_folds) {
      throw ValidationError("class " + std::to_string(c) + " has " +
                            std::to_string(by_class[c].size()) +
                            " samples, need at least " + std::to_string(n_folds));
    }
  }
  std::mt19937_64 rng(seed);
  std::vector<std::vector<std::size_t>> blocks(n_folds);
  std::size_t next = 0;
  for (auto& members : by_class) {
    std::shuffle(members.begin(), members.end(), rng);
    // The block counter carries over between classes so block sizes differ
    // by at most one.
    for (std::size_t idx : members) {
      blocks[next].push_back(idx);
      next = (next + 1) % n_folds;
    }
  }
  for (auto& b : blocks) std::sort(b.begin(), b.end());

  FoldPlan plan;
  for (std::size_t f = 0; f < n_folds; ++f) {
    FoldSplit split;
    const std::size_t dev = (f + 1) % n_folds;
    split.test = blocks[f];
    split.dev = blocks[dev];
    for (std::size_t b = 0; b < n_folds; ++b) {
      if (b == f || b == dev) continue;
      split.train.insert(split.train.end(), blocks[b].begin(), blocks[b].end());
    }
    std::sort(split.train.begin(), split.train.end());
    plan.folds.push_back(std::move(split));
  }
  return plan;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ValidationError("argmax of an empty vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

Evaluation evaluate(const ModelConfig& cfg, const ModelParameters& params,
                    std::span<const FeatureBundle> samples) {
  if (samples.empty()) throw ValidationError("evaluate: no samples");
  Evaluation out{ConfusionMatrix(cfg.n_classes), {}, {}};
  out.predicted.reserve(samples.size());
  for (const FeatureBundle& s : samples) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= cfg.n_classes) {
      throw ValidationError("sample " + s.id + " has no valid label");
    }
    const std::size_t pred = argmax(predict_probs(s, cfg, params));
    out.predicted.push_back(pred);
    out.confusion.add(static_cast<std::size_t>(s.label), pred);
  }
  out.metrics = compute_metrics(out.confusion);
  return out;
}

CrossValidationSummary summarize(std::span<const FoldResult> results) {
  if (results.empty()) throw ValidationError("no fold results to summarize");
  CrossValidationSummary s;
  s.pooled = ConfusionMatrix(results[0].confusion.classes());
  const double n = static_cast<double>(results.size());
  for (const FoldResult& r : results) {
    s.wa_mean += r.metrics.wa / n;
    s.ua_mean += r.metrics.ua / n;
    s.pooled += r.confusion;
  }
  for (const FoldResult& r : results) {
    s.wa_std += (r.metrics.wa - s.wa_mean) * (r.metrics.wa - s.wa_mean) / n;
    s.ua_std += (r.metrics.ua - s.ua_mean) * (r.metrics.ua - s.ua_mean) / n;
  }
  s.wa_std = std::sqrt(s.wa_std);
  s.ua_std = std::sqrt(s.ua_std);
  return s;
}

std::string format_report(std::span<const FoldResult> results,
                          const std::vector<std::string>& class_names) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  for (const FoldResult& r : results) {
    os << "fold " << r.fold << " run " << r.run << ": WA " << r.metrics.wa << "  UA "
       << r.metrics.ua << '\n';
    os << "  confusion (rows = truth, cols = predicted)\n";
    for (std::size_t t = 0; t < r.confusion.classes(); ++t) {
      os << "  " << std::setw(8) << (t < class_names.size() ? class_names[t] : std::to_string(t));
      for (std::size_t p = 0; p < r.confusion.classes(); ++p)
        os << ' ' << std::setw(6) << r.confusion.at(t, p);
      os << '\n';
    }
  }
  const CrossValidationSummary s = summarize(results);
  os << "mean over " << results.size() << " evaluation(s): WA " << s.wa_mean << " +- "
     << s.wa_std << "  UA " << s.ua_mean << " +- " << s.ua_std << '\n';
  return os.str();
}

nlohmann::json summary_json(std::span<const FoldResult> results,
                            const std::vector<std::string>& class_names) {
  const CrossValidationSummary s = summarize(results);
  const auto matrix = [](const ConfusionMatrix& cm) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t t = 0; t < cm.classes(); ++t) {
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t p = 0; p < cm.classes(); ++p) row.push_back(cm.at(t, p));
      rows.push_back(row);
    }
    return rows;
  };
  nlohmann::json folds = nlohmann::json::array();
  for (const FoldResult& r : results) {
    folds.push_back({{"fold", r.fold},
                     {"run", r.run},
                     {"wa", r.metrics.wa},
                     {"ua", r.metrics.ua},
                     {"confusion", matrix(r.confusion)}});
  }
  return {{"classes", class_names},
          {"folds", folds},
          {"wa_mean", s.wa_mean},
          {"wa_std", s.wa_std},
          {"ua_mean", s.ua_mean},
          {"ua_std", s.ua_std},
          {"pooled_confusion", matrix(s.pooled)}};
}

}  // namespace emorec
