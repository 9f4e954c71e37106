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

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "emorec/error.hpp"
#include "emorec/evaluation.hpp"
#include "emorec/gradcheck.hpp"

using namespace emorec;

TEST_CASE("hand-computed metrics") {
  const ConfusionMatrix cm = ConfusionMatrix::from_rows({{3, 1}, {1, 1}});
  CHECK(weighted_accuracy(cm) == 4.0 / 6.0);
  CHECK(unweighted_accuracy(cm) == 0.625);
  const ConfusionMatrix perfect = ConfusionMatrix::from_rows({{5, 0, 0}, {0, 2, 0}, {0, 0, 9}});
  CHECK(weighted_accuracy(perfect) == 1.0);
  CHECK(unweighted_accuracy(perfect) == 1.0);
  CHECK_THROWS_AS(weighted_accuracy(ConfusionMatrix(4)), ValidationError);
  CHECK_THROWS_AS(unweighted_accuracy(ConfusionMatrix(4)), ValidationError);
}

TEST_CASE("empty classes are left out of UA") {
  const ConfusionMatrix cm = ConfusionMatrix::from_rows({{2, 2, 0}, {0, 0, 0}, {0, 1, 3}});
  CHECK(unweighted_accuracy(cm) == doctest::Approx((0.5 + 0.75) / 2.0));
}

TEST_CASE("WA equals UA exactly on balanced data") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng() % 50, classes = 2 + rng() % 5;
    std::vector<std::vector<std::size_t>> rows(classes, std::vector<std::size_t>(classes, 0));
    for (auto& row : rows)
      for (std::size_t k = 0; k < n; ++k) ++row[rng() % classes];
    const ConfusionMatrix cm = ConfusionMatrix::from_rows(rows);
    CHECK(weighted_accuracy(cm) == unweighted_accuracy(cm));
    CHECK(weighted_accuracy(cm) >= 0.0);
    CHECK(weighted_accuracy(cm) <= 1.0);
  }
}

TEST_CASE("fold plan partitions the data") {
  std::mt19937_64 rng(6);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::vector<int> labels;
    for (int c = 0; c < 4; ++c)
      for (std::size_t k = 0; k < 10 + rng() % 15; ++k) labels.push_back(c);
    std::shuffle(labels.begin(), labels.end(), rng);
    const FoldPlan plan = make_folds(labels, 4, seed);
    REQUIRE(plan.folds.size() == 10);
    std::multiset<std::size_t> tests;
    for (std::size_t f = 0; f < 10; ++f) {
      const FoldSplit& s = plan.folds[f];
      std::vector<std::size_t> all = s.train;
      all.insert(all.end(), s.dev.begin(), s.dev.end());
      all.insert(all.end(), s.test.begin(), s.test.end());
      std::sort(all.begin(), all.end());
      CHECK(all.size() == labels.size());
      CHECK(std::adjacent_find(all.begin(), all.end()) == all.end());
      CHECK(s.dev == plan.folds[(f + 1) % 10].test);
      tests.insert(s.test.begin(), s.test.end());
      // Every class is spread evenly over the blocks.
      for (int c = 0; c < 4; ++c) {
        const auto count = std::count_if(s.test.begin(), s.test.end(),
                                         [&](std::size_t i) { return labels[i] == c; });
        const auto total = std::count(labels.begin(), labels.end(), c);
        CHECK(count >= total / 10);
        CHECK(count <= total / 10 + 1);
      }
    }
    CHECK(tests.size() == labels.size());
    CHECK(std::set<std::size_t>(tests.begin(), tests.end()).size() == labels.size());
  }
}

TEST_CASE("fold plan sizes and determinism") {
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) labels.push_back(i % 4);
  const FoldPlan a = make_folds(labels, 4, 3), b = make_folds(labels, 4, 3);
  for (std::size_t f = 0; f < 10; ++f) {
    CHECK(a.folds[f].test.size() == 10);
    CHECK(a.folds[f].dev.size() == 10);
    CHECK(a.folds[f].train.size() == 80);
    CHECK(a.folds[f].test == b.folds[f].test);
  }
  const FoldPlan c = make_folds(labels, 4, 4);
  bool differs = false;
  for (std::size_t f = 0; f < 10; ++f) differs |= a.folds[f].test != c.folds[f].test;
  CHECK(differs);
  labels.resize(36);
  CHECK_THROWS_AS(make_folds(labels, 4, 3), ValidationError);
}

TEST_CASE("argmax breaks ties toward the lowest index") {
  const std::vector<double> v = {0.2, 0.4, 0.4};
  CHECK(argmax(v) == 1);
  CHECK(argmax(std::vector<double>{1.0}) == 0);
  CHECK_THROWS_AS(argmax(std::vector<double>{}), ValidationError);
}

TEST_CASE("evaluate") {
  const ModelConfig cfg = tiny_model_config();
  ModelParameters p = init_parameters(cfg, 2);
  std::vector<FeatureBundle> data;
  for (std::uint64_t s = 0; s < 40; ++s) {
    FeatureBundle b = tiny_bundle(cfg, s);
    b.label = static_cast<int>(s % 4);
    data.push_back(b);
  }
  SUBCASE("a model biased to class 0 is perfect on class-0 data") {
    p.out_bias.mutable_data()[0] = 1e3;
    std::vector<FeatureBundle> zeros;
    for (FeatureBundle b : data) {
      b.label = 0;
      zeros.push_back(b);
    }
    const Evaluation ev = evaluate(cfg, p, zeros);
    CHECK(ev.metrics.wa == 1.0);
    CHECK(ev.metrics.ua == 1.0);
  }
  SUBCASE("sample order does not matter and matrices add up") {
    const Evaluation whole = evaluate(cfg, p, data);
    CHECK(whole.confusion.total() == data.size());
    std::vector<FeatureBundle> shuffled = data;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(1));
    CHECK(evaluate(cfg, p, shuffled).confusion == whole.confusion);
    const std::span<const FeatureBundle> all(data);
    ConfusionMatrix sum = evaluate(cfg, p, all.subspan(0, 15)).confusion;
    sum += evaluate(cfg, p, all.subspan(15)).confusion;
    CHECK(sum == whole.confusion);
    CHECK(compute_metrics(sum).wa == whole.metrics.wa);
  }
  SUBCASE("an untrained model sits near chance") {
    std::vector<FeatureBundle> many;
    std::mt19937_64 rng(9);
    for (std::uint64_t s = 0; s < 400; ++s) {
      FeatureBundle b = tiny_bundle(cfg, 1000 + s);
      b.label = static_cast<int>(rng() % 4);
      many.push_back(b);
    }
    const double wa = evaluate(cfg, p, many).metrics.wa;
    CHECK(wa > 0.15);
    CHECK(wa < 0.35);
  }
  CHECK_THROWS_AS(evaluate(cfg, p, std::vector<FeatureBundle>{}), ValidationError);
}

TEST_CASE("cross-fold summary and report") {
  std::vector<FoldResult> results;
  results.push_back({0, 0, ConfusionMatrix::from_rows({{2, 0}, {0, 2}}), {1.0, 1.0}});
  results.push_back({1, 0, ConfusionMatrix::from_rows({{1, 1}, {1, 1}}), {0.5, 0.5}});
  const CrossValidationSummary s = summarize(results);
  CHECK(s.wa_mean == 0.75);
  CHECK(s.wa_std == 0.25);
  CHECK(s.pooled.total() == 8);
  const std::string report = format_report(results, {"a", "b"});
  CHECK(report.find("fold 1 run 0") != std::string::npos);
  CHECK(report.find("0.7500 +- 0.2500") != std::string::npos);
  const nlohmann::json j = summary_json(results, {"a", "b"});
  CHECK(j["folds"].size() == 2);
  CHECK(j["ua_mean"] == 0.75);
}
