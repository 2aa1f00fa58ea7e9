// tests/test_baselines.cpp

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

#include <cmath>

#include "oracles.hpp"
#include "woods/baselines.hpp"
#include "woods/data.hpp"
#include "woods/errors.hpp"
#include "woods/losses.hpp"
#include "woods/rng.hpp"
#include "woods/serialize.hpp"

using namespace woods;

namespace {

LabeledDataset separable_id(std::uint64_t seed, std::size_t per_class) {
  GaussianComponent left{{-3.0, 0.0}, {0.5, 0.5}, {}};
  GaussianComponent right{{3.0, 0.0}, {0.5, 0.5}, {}};
  return gen_gaussian_labeled({left, right}, {per_class, per_class}, seed);
}

std::vector<Vector> far_ood(std::uint64_t seed, std::size_t count) {
  GaussianComponent top{{0.0, 6.0}, {0.5, 0.5}, {}};
  return gen_gaussian_samples(top, count, seed);
}

TrainConfig quick_config(int epochs, std::uint64_t seed) {
  TrainConfig config;
  config.epochs = epochs;
  config.batch_size = 32;
  config.mu1 = 0.05;
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("oe regularizer: uniform logits are a stationary point") {
  const OeRegularizer reg = oe_regularizer(Vector{0.7, 0.7, 0.7});
  CHECK(reg.value == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  for (double g : reg.grad_logits) CHECK(std::abs(g) <= 1e-15);
}

TEST_CASE("oe regularizer is shift invariant with softmax-minus-uniform gradient") {
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    Vector logits(4);
    for (double& v : logits) v = rng.uniform(-4.0, 4.0);
    const OeRegularizer reg = oe_regularizer(logits);
    Vector shifted = logits;
    for (double& v : shifted) v += 13.5;
    CHECK(oe_regularizer(shifted).value == doctest::Approx(reg.value).epsilon(1e-9));
    const Vector p = softmax(logits);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      CHECK(reg.grad_logits[j] == doctest::Approx(p[j] - 0.25).epsilon(1e-12));
    }
  }
}

TEST_CASE("energy regularizer terms: zero inside the margins, positive outside") {
  // F = -logsumexp(logits). Single logit z gives F = -z.
  // ID term: max(0, F - m_in)^2 with m_in = -1.
  CHECK(energy_reg_id_term(Vector{2.0}, -1.0).value == 0.0);  // F = -2 < -1
  const EnergyRegTerm id_violated = energy_reg_id_term(Vector{0.0}, -1.0);
  CHECK(id_violated.value == doctest::Approx(1.0).epsilon(1e-12));  // F = 0, gap 1
  // Wild term: max(0, m_out - F)^2 with m_out = -3.
  CHECK(energy_reg_wild_term(Vector{2.0}, -3.0).value == 0.0);  // F = -2 > -3
  const EnergyRegTerm wild_violated = energy_reg_wild_term(Vector{5.0}, -3.0);
  CHECK(wild_violated.value == doctest::Approx(4.0).epsilon(1e-12));  // F = -5, gap 2
}

TEST_CASE("energy regularizer gradients match finite differences off the hinge") {
  Rng rng(2);
  const double h = 1e-5;
  for (int i = 0; i < 60; ++i) {
    Vector logits(3);
    for (double& v : logits) v = rng.uniform(-3.0, 3.0);
    const double m_in = rng.uniform(-4.0, 2.0);
    const double free_energy = -energy_score(logits);
    if (std::abs(free_energy - m_in) < 1e-3) continue;  // skip the kink
    const EnergyRegTerm term = energy_reg_id_term(logits, m_in);
    for (std::size_t j = 0; j < logits.size(); ++j) {
      Vector up = logits, down = logits;
      up[j] += h;
      down[j] -= h;
      const double numeric =
          (energy_reg_id_term(up, m_in).value - energy_reg_id_term(down, m_in).value) /
          (2.0 * h);
      CHECK(std::abs(term.grad_logits[j] - numeric) <=
            1e-4 * std::max({std::abs(numeric), std::abs(term.grad_logits[j]), 1e-4}));
    }
  }
}

TEST_CASE("baseline config validation") {
  BaselineConfig config;
  config.method = BaselineMethod::kEnergyReg;
  config.lambda_reg = 1.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.m_in = -7.0;
  CHECK_THROWS_AS(config.validate(), ConfigError);
  config.m_out = -25.0;
  CHECK_NOTHROW(config.validate());
  config.lambda_reg = -0.1;
  CHECK_THROWS_AS(config.validate(), ConfigError);
}

TEST_CASE("lambda = 0 baselines are trajectory-identical to ce_only") {
  const LabeledDataset id_data = separable_id(10, 60);
  const std::vector<Vector> wild = far_ood(11, 80);
  const TrainConfig config = quick_config(3, 77);

  auto init = [] { return mlp_init({2, 8, 2}, Activation::kRelu, 5); };
  const auto [ce_model, ce_logs] = ce_only_train(init(), id_data, config);
  const auto [oe_model, oe_logs] = oe_train(init(), id_data, wild, 0.0, config);
  const auto [er_model, er_logs] =
      energy_reg_train(init(), id_data, wild, 0.0, -7.0, -25.0, config);

  // Bitwise parameter equality, checked through the canonical serialization.
  CHECK(model_to_json(oe_model) == model_to_json(ce_model));
  CHECK(model_to_json(er_model) == model_to_json(ce_model));
  REQUIRE(ce_logs.size() == oe_logs.size());
  for (std::size_t i = 0; i < ce_logs.size(); ++i) {
    CHECK(ce_logs[i].cls_constraint == oe_logs[i].cls_constraint);
  }
}

TEST_CASE("ce_only: zero epochs, determinism, loss decreases") {
  const LabeledDataset id_data = separable_id(20, 100);
  auto init = [] { return mlp_init({2, 8, 2}, Activation::kRelu, 21); };

  const auto [unchanged, empty_logs] = ce_only_train(init(), id_data, quick_config(0, 1));
  CHECK(empty_logs.empty());
  CHECK(model_to_json(unchanged) == model_to_json(init()));

  const auto [a, logs_a] = ce_only_train(init(), id_data, quick_config(8, 3));
  const auto [b, logs_b] = ce_only_train(init(), id_data, quick_config(8, 3));
  CHECK(model_to_json(a) == model_to_json(b));

  // CE on a separable task trends down: compare first/last epoch means.
  REQUIRE(logs_a.size() == 8);
  CHECK(logs_a.back().cls_constraint < logs_a.front().cls_constraint);
  // lambda/beta columns stay zero for baselines.
  for (const EpochLog& log : logs_a) {
    CHECK(log.lambda1 == 0.0);
    CHECK(log.beta1 == 0.0);
  }
}

TEST_CASE("oe_train pushes wild softmax toward uniform") {
  const LabeledDataset id_data = separable_id(30, 150);
  const std::vector<Vector> wild = far_ood(31, 200);
  auto init = [] { return mlp_init({2, 16, 2}, Activation::kRelu, 33); };
  const TrainConfig config = quick_config(15, 5);

  const auto [ce_model, ce_logs] = ce_only_train(init(), id_data, config);
  const auto [oe_model, oe_logs] = oe_train(init(), id_data, wild, 0.5, config);

  auto mean_wild_msp = [&](const MlpModel& m) {
    double total = 0.0;
    for (const Vector& x : wild) total += msp_score(forward(m, x));
    return total / static_cast<double>(wild.size());
  };
  // The OE-regularized model is less confident on wild data than plain CE.
  CHECK(mean_wild_msp(oe_model) < mean_wild_msp(ce_model));
}

TEST_CASE("energy_reg_train separates free energies across the margins") {
  const LabeledDataset id_data = separable_id(40, 150);
  const std::vector<Vector> wild = far_ood(41, 200);
  auto init = [] { return mlp_init({2, 16, 2}, Activation::kRelu, 43); };
  TrainConfig config = quick_config(15, 7);
  config.mu1 = 0.005;  // the squared hinge is stiff; keep the step small
  const double m_in = -4.0;
  const double m_out = -2.0;

  const auto [ce_model, ce_logs] = ce_only_train(init(), id_data, config);
  const auto [er_model, er_logs] =
      energy_reg_train(init(), id_data, wild, 0.5, m_in, m_out, config);

  auto reg_value = [&](const MlpModel& m) {
    double id_term = 0.0;
    for (const Vector& x : id_data.features) {
      id_term += energy_reg_id_term(forward(m, x), m_in).value;
    }
    double wild_term = 0.0;
    for (const Vector& x : wild) {
      wild_term += energy_reg_wild_term(forward(m, x), m_out).value;
    }
    return id_term / id_data.size() + wild_term / wild.size();
  };
  CHECK(reg_value(er_model) < reg_value(ce_model));
}

TEST_CASE("energy_reg_train requires margins") {
  const LabeledDataset id_data = separable_id(50, 20);
  const std::vector<Vector> wild = far_ood(51, 20);
  BaselineConfig config;
  config.method = BaselineMethod::kEnergyReg;
  config.lambda_reg = 1.0;
  CHECK_THROWS_AS(
      baseline_train(mlp_init({2, 4, 2}, Activation::kRelu, 1), id_data, &wild, config,
                     quick_config(1, 1)),
      ConfigError);
}

TEST_CASE("regularized methods need wild data when lambda > 0") {
  const LabeledDataset id_data = separable_id(60, 20);
  BaselineConfig config;
  config.method = BaselineMethod::kOe;
  config.lambda_reg = 0.5;
  CHECK_THROWS_AS(baseline_train(mlp_init({2, 4, 2}, Activation::kRelu, 1), id_data,
                                 nullptr, config, quick_config(1, 1)),
                  ConfigError);
}
