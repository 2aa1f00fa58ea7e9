// tests/test_eval.cpp

// Copyright 2026 woods contributors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "woods/data.hpp"
#include "woods/errors.hpp"
#include "woods/eval.hpp"
#include "woods/losses.hpp"
#include "woods/rng.hpp"

using namespace woods;

namespace {

ScoreSet random_scores(Rng& rng, std::size_t n_id, std::size_t n_ood, bool quantize) {
  ScoreSet scores;
  for (std::size_t i = 0; i < n_id; ++i) {
    double s = rng.uniform(-2.0, 3.0);
    if (quantize) s = std::round(s * 4.0) / 4.0;  // force ties
    scores.id_scores.push_back(s);
  }
  for (std::size_t i = 0; i < n_ood; ++i) {
    double s = rng.uniform(-3.0, 2.0);
    if (quantize) s = std::round(s * 4.0) / 4.0;
    scores.ood_scores.push_back(s);
  }
  return scores;
}

}  // namespace

TEST_CASE("fpr_at_tpr: 1..100 versus one outlier") {
  ScoreSet scores;
  for (int i = 1; i <= 100; ++i) scores.id_scores.push_back(static_cast<double>(i));
  scores.ood_scores = {0.5};
  const FprResult result = fpr_at_tpr(scores, 0.95);
  // 95 of 100 ids sit at or above 6.
  CHECK(result.threshold == 6.0);
  CHECK(result.fpr == 0.0);
}

TEST_CASE("fpr_at_tpr: separable case has zero fpr") {
  ScoreSet scores;
  for (int i = 0; i < 50; ++i) scores.id_scores.push_back(10.0 + i);
  for (int i = 0; i < 30; ++i) scores.ood_scores.push_back(-10.0 - i);
  const FprResult result = fpr_at_tpr(scores, 0.95);
  CHECK(result.fpr == 0.0);
}

TEST_CASE("fpr_at_tpr: interleaved identical distributions") {
  // ID and OOD share the same values, so declaring 95% of ID as ID also
  // declares ~95% of OOD as ID; the exhaustive scan confirms rank-wise.
  ScoreSet scores;
  for (int i = 0; i < 200; ++i) {
    scores.id_scores.push_back(static_cast<double>(i));
    scores.ood_scores.push_back(static_cast<double>(i));
  }
  const FprResult result = fpr_at_tpr(scores, 0.95);
  const oracles::FprScan scan = oracles::fpr_scan(scores.id_scores, scores.ood_scores, 0.95);
  CHECK(result.threshold == scan.threshold);
  CHECK(result.fpr == scan.fpr);
  CHECK(result.fpr == doctest::Approx(0.95).epsilon(0.01));
}

TEST_CASE("fpr_at_tpr equals the exhaustive threshold scan on random sets") {
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_id = 1 + rng.index(500);
    const std::size_t n_ood = 1 + rng.index(500);
    const ScoreSet scores = random_scores(rng, n_id, n_ood, trial % 2 == 0);
    const double tpr = 0.5 + 0.5 * rng.uniform();
    const FprResult got = fpr_at_tpr(scores, tpr);
    const oracles::FprScan want =
        oracles::fpr_scan(scores.id_scores, scores.ood_scores, tpr);
    CHECK(got.threshold == want.threshold);
    CHECK(got.fpr == want.fpr);
  }
}

TEST_CASE("fpr_at_tpr input validation") {
  ScoreSet empty_ood;
  empty_ood.id_scores = {1.0};
  CHECK_THROWS_AS(fpr_at_tpr(empty_ood, 0.95), ConfigError);
  ScoreSet empty_id;
  empty_id.ood_scores = {1.0};
  CHECK_THROWS_AS(fpr_at_tpr(empty_id, 0.95), ConfigError);
}

TEST_CASE("auroc: separable, all ties, and swap symmetry") {
  ScoreSet separable;
  separable.id_scores = {5.0, 6.0, 7.0};
  separable.ood_scores = {1.0, 2.0};
  CHECK(auroc(separable) == 1.0);

  ScoreSet constant;
  constant.id_scores = {3.0, 3.0, 3.0};
  constant.ood_scores = {3.0, 3.0};
  CHECK(auroc(constant) == 0.5);

  // Swapping the lists complements the statistic when there are no ties.
  ScoreSet mixed;
  mixed.id_scores = {0.1, 0.9, 2.2, -0.7};
  mixed.ood_scores = {0.4, -1.0, 1.5};
  ScoreSet swapped;
  swapped.id_scores = mixed.ood_scores;
  swapped.ood_scores = mixed.id_scores;
  CHECK(auroc(swapped) == doctest::Approx(1.0 - auroc(mixed)).epsilon(1e-12));
}

TEST_CASE("auroc equals the O(n^2) pairwise count on random sets") {
  Rng rng(505);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n_id = 1 + rng.index(120);
    const std::size_t n_ood = 1 + rng.index(80);
    const ScoreSet scores = random_scores(rng, n_id, n_ood, trial % 3 == 0);
    const double got = auroc(scores);
    const double want = oracles::auroc_pairwise(scores.id_scores, scores.ood_scores);
    CHECK(std::abs(got - want) <= 1e-12);
  }
}

TEST_CASE("auroc: the 60+40 random case matches brute force") {
  Rng rng(606);
  const ScoreSet scores = random_scores(rng, 60, 40, false);
  CHECK(std::abs(auroc(scores) -
                 oracles::auroc_pairwise(scores.id_scores, scores.ood_scores)) <= 1e-12);
}

TEST_CASE("auroc is invariant under strictly increasing transforms") {
  Rng rng(707);
  const ScoreSet scores = random_scores(rng, 80, 60, true);
  const double base = auroc(scores);
  ScoreSet exp_scores;
  for (double s : scores.id_scores) exp_scores.id_scores.push_back(std::exp(s));
  for (double s : scores.ood_scores) exp_scores.ood_scores.push_back(std::exp(s));
  CHECK(auroc(exp_scores) == doctest::Approx(base).epsilon(1e-12));
  ScoreSet affine;
  for (double s : scores.id_scores) affine.id_scores.push_back(3.5 * s + 11.0);
  for (double s : scores.ood_scores) affine.ood_scores.push_back(3.5 * s + 11.0);
  CHECK(auroc(affine) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("accuracy: constant predictor, mixed batch, and recount") {
  // Single linear layer with fixed weights: logits = (x0, -x0).
  MlpModel model;
  Matrix w(2, 1);
  w(0, 0) = 1.0;
  w(1, 0) = -1.0;
  model.layers.push_back({w, Vector{0.0, 0.0}});

  LabeledDataset all_zero;
  all_zero.dim = 1;
  all_zero.num_classes = 2;
  for (int i = 0; i < 10; ++i) {
    all_zero.features.push_back({1.0 + i});
    all_zero.labels.push_back(0);
  }
  CHECK(accuracy(model, all_zero) == 1.0);

  LabeledDataset mixed;
  mixed.dim = 1;
  mixed.num_classes = 2;
  mixed.features = {{1.0}, {2.0}, {-1.0}, {-3.0}};
  mixed.labels = {0, 0, 1, 0};  // 3 of 4 correct
  CHECK(accuracy(model, mixed) == 0.75);

  // Independent per-sample recount.
  std::size_t correct = 0;
  for (std::size_t i = 0; i < mixed.size(); ++i) {
    const Vector logits = forward(model, mixed.features[i]);
    const std::size_t arg =
        logits[0] >= logits[1] ? 0 : 1;  // ties toward the lower index
    correct += arg == mixed.labels[i] ? 1 : 0;
  }
  CHECK(accuracy(model, mixed) ==
        static_cast<double>(correct) / static_cast<double>(mixed.size()));

  // Argmax tie at x = 0 goes to class 0.
  LabeledDataset tie;
  tie.dim = 1;
  tie.num_classes = 2;
  tie.features = {{0.0}};
  tie.labels = {0};
  CHECK(accuracy(model, tie) == 1.0);
}

TEST_CASE("validate_threshold: separated sets") {
  const Vector id_scores = {10.0, 11.0, 12.0};
  const Vector wild_scores = {0.0, 1.0, 2.0};
  const ThresholdChoice choice = validate_threshold(id_scores, wild_scores, 0.05, 0.0);
  CHECK(choice.wild_in_rate == 0.0);
  CHECK(choice.threshold > 2.0);
  CHECK(choice.threshold <= 10.0);
}

TEST_CASE("validate_threshold: vacuous constraint picks +inf") {
  const Vector id_scores = {1.0, 2.0};
  const Vector wild_scores = {0.5, 1.5};
  const ThresholdChoice choice = validate_threshold(id_scores, wild_scores, 1.0, 0.0);
  CHECK(std::isinf(choice.threshold));
  CHECK(choice.threshold > 0.0);
  CHECK(choice.wild_in_rate == 0.0);
}

TEST_CASE("validate_threshold: identical multisets keep most wild declared in") {
  Vector scores;
  for (int i = 0; i < 100; ++i) scores.push_back(static_cast<double>(i));
  const ThresholdChoice choice = validate_threshold(scores, scores, 0.05, 0.0);
  CHECK(choice.wild_in_rate >= 0.95);
  const oracles::ThresholdScan scan = oracles::threshold_scan(scores, scores, 0.05, 0.0);
  CHECK(choice.threshold == scan.threshold);
  CHECK(choice.wild_in_rate == scan.wild_in_rate);
}

TEST_CASE("validate_threshold matches the exhaustive scan and stays feasible") {
  Rng rng(808);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n_id = 1 + rng.index(200);
    const std::size_t n_wild = 1 + rng.index(200);
    const ScoreSet scores = random_scores(rng, n_id, n_wild, trial % 2 == 1);
    const double alpha = rng.uniform(0.0, 0.3);
    const double epsilon = rng.uniform(0.0, 0.05);
    const ThresholdChoice got =
        validate_threshold(scores.id_scores, scores.ood_scores, alpha, epsilon);
    const oracles::ThresholdScan want =
        oracles::threshold_scan(scores.id_scores, scores.ood_scores, alpha, epsilon);
    CHECK(got.threshold == want.threshold);
    CHECK(got.wild_in_rate == want.wild_in_rate);
    // Feasibility by construction.
    std::size_t id_out = 0;
    for (double s : scores.id_scores) id_out += s < got.threshold ? 1 : 0;
    CHECK(static_cast<double>(id_out) / static_cast<double>(n_id) <= alpha + epsilon);
  }
}

TEST_CASE("validate_threshold rejects empty inputs") {
  const Vector scores = {1.0};
  CHECK_THROWS_AS(validate_threshold({}, scores, 0.05, 0.0), ConfigError);
  CHECK_THROWS_AS(validate_threshold(scores, {}, 0.05, 0.0), ConfigError);
}

TEST_CASE("score_energy: zero logits and w orientation") {
  MlpModel model;
  model.layers.push_back({Matrix(2, 2), Vector(2, 0.0)});
  model.energy_slope_w = -1.0;
  // All-zero logits: sigma(-ln 2) = 1/3 exactly.
  CHECK(score_energy(model, Vector{0.3, 0.4}) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  model.energy_slope_w = 0.0;
  CHECK(score_energy(model, Vector{5.0, -2.0}) == 0.5);
}

TEST_CASE("score_energy ordering matches w*E ordering") {
  const MlpModel model = mlp_init({2, 6, 2}, Activation::kTanh, 2025);
  Rng rng(2026);
  std::vector<Vector> inputs;
  for (int i = 0; i < 30; ++i) {
    inputs.push_back({rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)});
  }
  std::vector<std::pair<double, double>> pairs;  // (w*E, sigma(w*E))
  for (const Vector& x : inputs) {
    const double we = model.energy_slope_w * energy_score(forward(model, x));
    pairs.emplace_back(we, score_energy(model, x));
  }
  std::sort(pairs.begin(), pairs.end());
  for (std::size_t i = 1; i < pairs.size(); ++i) {
    CHECK(pairs[i].second >= pairs[i - 1].second);
  }
}

TEST_CASE("evaluate: scorer plumbing and head requirement") {
  const MlpModel model = mlp_init({2, 5, 2}, Activation::kRelu, 3030);
  LabeledDataset id_test;
  id_test.dim = 2;
  id_test.num_classes = 2;
  Rng rng(3031);
  for (int i = 0; i < 40; ++i) {
    id_test.features.push_back({rng.normal(), rng.normal()});
    id_test.labels.push_back(rng.index(2));
  }
  std::vector<Vector> ood_test;
  for (int i = 0; i < 40; ++i) ood_test.push_back({rng.normal() + 5.0, rng.normal()});

  const DetectionReport energy = evaluate(model, id_test, ood_test, Scorer::kEnergySigmoid);
  const DetectionReport msp = evaluate(model, id_test, ood_test, Scorer::kMsp);
  for (const DetectionReport& r : {energy, msp}) {
    CHECK(r.fpr_at_95tpr >= 0.0);
    CHECK(r.fpr_at_95tpr <= 1.0);
    CHECK(r.auroc >= 0.0);
    CHECK(r.auroc <= 1.0);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.n_id == 40);
    CHECK(r.n_ood == 40);
  }
  CHECK_THROWS_AS(evaluate(model, id_test, ood_test, Scorer::kNnHead), ConfigError);

  MlpInitOptions opts;
  opts.with_head = true;
  const MlpModel with_head = mlp_init({2, 5, 2}, Activation::kRelu, 3030, opts);
  const DetectionReport head = evaluate(with_head, id_test, ood_test, Scorer::kNnHead);
  CHECK(head.auroc >= 0.0);
  CHECK(head.auroc <= 1.0);
}

TEST_CASE("evaluate: untrained random models hover near chance") {
  // AUROC of a random model against nearby OOD stays in a loose band across
  // seeds; this guards score plumbing (not detection quality).
  LabeledDataset id_test;
  id_test.dim = 2;
  id_test.num_classes = 2;
  Rng rng(4040);
  for (int i = 0; i < 150; ++i) {
    id_test.features.push_back({rng.normal(), rng.normal()});
    id_test.labels.push_back(rng.index(2));
  }
  std::vector<Vector> ood_test;
  for (int i = 0; i < 150; ++i) {
    ood_test.push_back({rng.normal() * 1.05, rng.normal() * 1.05});
  }
  double mean_auroc = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const MlpModel model = mlp_init({2, 8, 2}, Activation::kTanh, seed);
    mean_auroc += evaluate(model, id_test, ood_test, Scorer::kEnergySigmoid).auroc;
  }
  mean_auroc /= 5.0;
  CHECK(mean_auroc >= 0.3);
  CHECK(mean_auroc <= 0.7);
}
