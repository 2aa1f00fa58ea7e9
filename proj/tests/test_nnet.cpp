// tests/test_nnet.cpp

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
#include "woods/errors.hpp"
#include "woods/losses.hpp"
#include "woods/nnet.hpp"
#include "woods/rng.hpp"
#include "woods/serialize.hpp"

using namespace woods;

namespace {

bool params_equal(const MlpModel& a, const MlpModel& b) {
  MlpModel ca = a;
  MlpModel cb = b;
  auto sa = param_slots(ca);
  auto sb = param_slots(cb);
  if (sa.size() != sb.size()) return false;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    if (*sa[i].value != *sb[i].value) return false;
  }
  return true;
}

MlpModel single_linear_layer(const Matrix& w, const Vector& b) {
  MlpModel model;
  model.layers.push_back({w, b});
  return model;
}

}  // namespace

TEST_CASE("mlp_init shapes and determinism") {
  const MlpModel model = mlp_init({2, 8, 2}, Activation::kRelu, 7);
  REQUIRE(model.layers.size() == 2);
  CHECK(model.layers[0].weight.rows() == 8);
  CHECK(model.layers[0].weight.cols() == 2);
  CHECK(model.layers[0].bias.size() == 8);
  CHECK(model.layers[1].weight.rows() == 2);
  CHECK(model.layers[1].weight.cols() == 8);
  CHECK(model.layers[1].bias.size() == 2);
  CHECK(model.energy_slope_w == -1.0);
  for (double b : model.layers[0].bias) CHECK(b == 0.0);

  const MlpModel again = mlp_init({2, 8, 2}, Activation::kRelu, 7);
  CHECK(params_equal(model, again));
}

TEST_CASE("mlp_init rejects degenerate dims") {
  CHECK_THROWS_AS(mlp_init({2}, Activation::kRelu, 0), ConfigError);
  CHECK_THROWS_AS(mlp_init({}, Activation::kRelu, 0), ConfigError);
  CHECK_THROWS_AS(mlp_init({2, 0, 2}, Activation::kRelu, 0), ConfigError);
}

TEST_CASE("mlp_init: different seeds give different weights") {
  const MlpModel a = mlp_init({3, 4, 4, 3}, Activation::kTanh, 1);
  const MlpModel b = mlp_init({3, 4, 4, 3}, Activation::kTanh, 2);
  // Compare through the serialized form, the same bytes the model file gets.
  CHECK(model_to_json(a) != model_to_json(b));
  CHECK(model_to_json(a) == model_to_json(mlp_init({3, 4, 4, 3}, Activation::kTanh, 1)));
}

TEST_CASE("forward: all-zero model maps anything to zero logits") {
  MlpModel model;
  model.layers.push_back({Matrix(4, 3), Vector(4, 0.0)});
  model.layers.push_back({Matrix(2, 4), Vector(2, 0.0)});
  const Vector logits = forward(model, Vector{1.0, -2.0, 3.0});
  CHECK(logits == Vector{0.0, 0.0});
}

TEST_CASE("forward: identity single layer") {
  Matrix eye(2, 2);
  eye(0, 0) = 1.0;
  eye(1, 1) = 1.0;
  const MlpModel model = single_linear_layer(eye, Vector(2, 0.0));
  const Vector logits = forward(model, Vector{1.0, 2.0});
  CHECK(logits == Vector{1.0, 2.0});
}

TEST_CASE("forward matches a straight-line re-evaluation") {
  for (Activation act : {Activation::kRelu, Activation::kTanh}) {
    const MlpModel model = mlp_init({3, 5, 4, 2}, act, 99);
    Rng rng(123);
    for (int i = 0; i < 20; ++i) {
      Vector x(3);
      for (double& v : x) v = rng.uniform(-2.0, 2.0);
      const Vector got = forward(model, x);
      const Vector want = oracles::mlp_eval(model, x);
      REQUIRE(got.size() == want.size());
      for (std::size_t j = 0; j < got.size(); ++j) {
        CHECK(got[j] == doctest::Approx(want[j]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("forward is pure: identical inputs give bit-identical logits") {
  const MlpModel model = mlp_init({2, 6, 3}, Activation::kTanh, 5);
  const Vector x = {0.3, -1.7};
  const Vector a = forward(model, x);
  const Vector b = forward(model, x);
  CHECK(a == b);
}

TEST_CASE("forward rejects wrong input size") {
  const MlpModel model = mlp_init({3, 4, 2}, Activation::kRelu, 1);
  CHECK_THROWS_AS(forward(model, Vector{1.0, 2.0}), ConfigError);
}

TEST_CASE("head_forward matches straight-line head evaluation") {
  MlpInitOptions opts;
  opts.with_head = true;
  opts.head_hidden_dim = 7;
  const MlpModel model = mlp_init({2, 6, 2}, Activation::kRelu, 21, opts);
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    Vector x(2);
    for (double& v : x) v = rng.uniform(-2.0, 2.0);
    ForwardTrace trace;
    forward(model, x, &trace);
    const double got = head_forward(model, trace);
    CHECK(got == doctest::Approx(oracles::head_eval(model, x)).epsilon(1e-12));
  }
}

TEST_CASE("head_forward requires a head") {
  const MlpModel model = mlp_init({2, 4, 2}, Activation::kRelu, 3);
  ForwardTrace trace;
  forward(model, Vector{0.0, 0.0}, &trace);
  CHECK_THROWS_AS(head_forward(model, trace), ConfigError);
}

TEST_CASE("backward: zero upstream gradient gives zero gradients") {
  const MlpModel model = mlp_init({2, 5, 3}, Activation::kTanh, 9);
  ForwardTrace trace;
  forward(model, Vector{0.4, -0.9}, &trace);
  Gradients grads = backward(model, trace, Vector{0.0, 0.0, 0.0});
  auto slots = param_slots(grads);
  for (const auto& slot : slots) CHECK(*slot.value == 0.0);
}

TEST_CASE("backward: single linear layer analytic gradient") {
  // loss = logits . c  =>  dW = c x^T, db = c.
  Matrix w(2, 3);
  Rng rng(13);
  for (double& v : w.data()) v = rng.uniform(-1.0, 1.0);
  const MlpModel model = single_linear_layer(w, Vector{0.1, -0.2});
  const Vector x = {1.5, -2.0, 0.5};
  const Vector c = {0.7, -1.3};
  ForwardTrace trace;
  forward(model, x, &trace);
  const Gradients grads = backward(model, trace, c);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(grads.layers[0].bias[i] == c[i]);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(grads.layers[0].weight(i, j) == doctest::Approx(c[i] * x[j]).epsilon(1e-15));
    }
  }
}

TEST_CASE("backward matches finite differences on a random 2-layer model") {
  const MlpModel model = mlp_init({3, 6, 2}, Activation::kTanh, 31);
  const Vector x = {0.8, -0.3, 1.1};
  const std::size_t label = 1;
  auto loss_fn = [&](const MlpModel& m) {
    return cross_entropy(forward(m, x), label).value;
  };
  MlpModel work = model;
  ForwardTrace trace;
  forward(work, x, &trace);
  const CrossEntropyLoss ce = cross_entropy(trace.logits, label);
  const Gradients analytic = backward(work, trace, ce.grad_logits);
  const Gradients numeric = oracles::fd_gradients(model, loss_fn);
  CHECK(oracles::max_rel_err(analytic, numeric) <= 1e-4);
}

TEST_CASE("backward rejects a mismatched trace") {
  const MlpModel model = mlp_init({2, 4, 2}, Activation::kRelu, 3);
  const MlpModel other = mlp_init({2, 5, 2}, Activation::kRelu, 3);
  ForwardTrace trace;
  forward(other, Vector{1.0, 1.0}, &trace);
  CHECK_THROWS_AS(backward(model, trace, Vector{1.0, 0.0}), ConfigError);
}

TEST_CASE("sgd_step: plain gradient step with zero momentum") {
  MlpModel model = mlp_init({2, 3, 2}, Activation::kRelu, 17);
  const MlpModel before = model;
  Gradients grads = zero_gradients(model);
  grads.layers[0].weight(1, 0) = 2.0;
  grads.energy_slope_w = 0.5;
  OptimizerState opt = optimizer_init(model, 0.1, 0.0, 0.0, false);
  sgd_step(model, grads, opt);
  CHECK(model.layers[0].weight(1, 0) ==
        doctest::Approx(before.layers[0].weight(1, 0) - 0.1 * 2.0).epsilon(1e-15));
  CHECK(model.energy_slope_w ==
        doctest::Approx(before.energy_slope_w - 0.1 * 0.5).epsilon(1e-15));
}

TEST_CASE("sgd_step: zero gradient and zero weight decay is the identity") {
  MlpModel model = mlp_init({2, 4, 2}, Activation::kTanh, 19);
  const MlpModel before = model;
  const Gradients grads = zero_gradients(model);
  OptimizerState opt = optimizer_init(model, 0.05, 0.9, 0.0, true);
  sgd_step(model, grads, opt);
  sgd_step(model, grads, opt);
  CHECK(params_equal(model, before));
}

TEST_CASE("sgd_step: two identical gradients follow the velocity recurrence") {
  // v1 = g, d1 = g + m v1; v2 = m v1 + g, d2 = g + m v2. With m = 0.9:
  // d1 = 1.9 g, d2 = 2.71 g.
  MlpModel model = single_linear_layer(Matrix(1, 1), Vector{0.0});
  model.layers[0].weight(0, 0) = 1.0;
  Gradients grads = zero_gradients(model);
  grads.layers[0].weight(0, 0) = 0.5;
  OptimizerState opt = optimizer_init(model, 0.1, 0.9, 0.0, true);
  sgd_step(model, grads, opt);
  CHECK(model.layers[0].weight(0, 0) ==
        doctest::Approx(1.0 - 0.1 * 1.9 * 0.5).epsilon(1e-15));
  sgd_step(model, grads, opt);
  CHECK(model.layers[0].weight(0, 0) ==
        doctest::Approx(1.0 - 0.1 * 1.9 * 0.5 - 0.1 * 2.71 * 0.5).epsilon(1e-15));

  // Heavy-ball flavor: d1 = g, d2 = 1.9 g.
  MlpModel plain = single_linear_layer(Matrix(1, 1), Vector{0.0});
  plain.layers[0].weight(0, 0) = 1.0;
  OptimizerState opt2 = optimizer_init(plain, 0.1, 0.9, 0.0, false);
  sgd_step(plain, grads, opt2);
  CHECK(plain.layers[0].weight(0, 0) == doctest::Approx(1.0 - 0.05).epsilon(1e-15));
  sgd_step(plain, grads, opt2);
  CHECK(plain.layers[0].weight(0, 0) ==
        doctest::Approx(1.0 - 0.05 - 0.1 * 1.9 * 0.5).epsilon(1e-15));
}

TEST_CASE("sgd_step: weight decay touches weights but not biases or w") {
  MlpModel model = mlp_init({2, 3, 2}, Activation::kRelu, 23);
  model.layers[0].bias[0] = 0.7;
  model.energy_slope_w = -1.0;
  const MlpModel before = model;
  const Gradients grads = zero_gradients(model);
  OptimizerState opt = optimizer_init(model, 0.1, 0.0, 0.01, false);
  sgd_step(model, grads, opt);
  CHECK(model.layers[0].weight(0, 0) ==
        doctest::Approx(before.layers[0].weight(0, 0) * (1.0 - 0.1 * 0.01))
            .epsilon(1e-15));
  CHECK(model.layers[0].bias[0] == 0.7);
  CHECK(model.energy_slope_w == -1.0);
}

TEST_CASE("sgd_step: non-finite gradient names the parameter") {
  MlpModel model = mlp_init({2, 3, 2}, Activation::kRelu, 29);
  Gradients grads = zero_gradients(model);
  grads.layers[1].bias[1] = std::numeric_limits<double>::quiet_NaN();
  OptimizerState opt = optimizer_init(model, 0.1);
  try {
    sgd_step(model, grads, opt);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layers[1].bias[1]") != std::string::npos);
  }
}

TEST_CASE("finite_diff_check: cross-entropy batch loss") {
  const MlpModel model = mlp_init({2, 5, 3}, Activation::kTanh, 37);
  std::vector<Vector> xs;
  std::vector<std::size_t> ys;
  Rng rng(41);
  for (int i = 0; i < 8; ++i) {
    xs.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
    ys.push_back(rng.index(3));
  }
  auto loss_fn = [&](const MlpModel& m) {
    double total = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      total += cross_entropy(forward(m, xs[i]), ys[i]).value;
    }
    return total / static_cast<double>(xs.size());
  };
  auto grad_fn = [&](const MlpModel& m) {
    Gradients grads = zero_gradients(m);
    ForwardTrace trace;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      forward(m, xs[i], &trace);
      const CrossEntropyLoss ce = cross_entropy(trace.logits, ys[i]);
      backward_accumulate(m, trace, ce.grad_logits, 0.0,
                          1.0 / static_cast<double>(xs.size()), grads);
    }
    return grads;
  };
  const FiniteDiffReport report = finite_diff_check(model, loss_fn, grad_fn, 100, 7);
  CHECK(report.coords_checked == 100);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("finite_diff_check: constant loss reports ~0 error") {
  const MlpModel model = mlp_init({2, 4, 2}, Activation::kRelu, 43);
  auto loss_fn = [](const MlpModel&) { return 3.5; };
  auto grad_fn = [](const MlpModel& m) { return zero_gradients(m); };
  const FiniteDiffReport report = finite_diff_check(model, loss_fn, grad_fn, 50, 11);
  CHECK(report.max_rel_err <= 1e-9);
}

TEST_CASE("finite_diff_check: sigmoid-energy loss") {
  const MlpModel model = mlp_init({2, 6, 2}, Activation::kTanh, 47);
  std::vector<Vector> xs;
  Rng rng(53);
  for (int i = 0; i < 6; ++i) {
    xs.push_back({rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0)});
  }
  auto loss_fn = [&](const MlpModel& m) {
    double total = 0.0;
    for (const Vector& x : xs) {
      total += ood_loss_in(energy_score(forward(m, x)), m.energy_slope_w).value;
    }
    return total / static_cast<double>(xs.size());
  };
  auto grad_fn = [&](const MlpModel& m) {
    Gradients grads = zero_gradients(m);
    ForwardTrace trace;
    const double scale = 1.0 / static_cast<double>(xs.size());
    for (const Vector& x : xs) {
      forward(m, x, &trace);
      const EnergyScore energy = energy_score_with_grad(trace.logits);
      const ScalarOodLoss loss = ood_loss_in(energy.value, m.energy_slope_w);
      Vector d_logits(trace.logits.size());
      for (std::size_t j = 0; j < d_logits.size(); ++j) {
        d_logits[j] = loss.grad_score * energy.grad_logits[j];
      }
      backward_accumulate(m, trace, d_logits, 0.0, scale, grads);
      grads.energy_slope_w += scale * loss.grad_w;
    }
    return grads;
  };
  const FiniteDiffReport report = finite_diff_check(model, loss_fn, grad_fn, 100, 13);
  CHECK(report.max_rel_err <= 1e-4);
}

TEST_CASE("model JSON round trip preserves every parameter bit") {
  MlpInitOptions opts;
  opts.with_head = true;
  opts.head_hidden_dim = 5;
  opts.energy_slope_w = -0.75;
  MlpModel model = mlp_init({3, 7, 4, 2}, Activation::kTanh, 61, opts);
  model.energy_slope_w = -1.2345678901234567;
  const std::string text = model_to_json(model);
  const MlpModel loaded = model_from_json(text);
  CHECK(params_equal(model, loaded));
  CHECK(loaded.activation == Activation::kTanh);
  REQUIRE(loaded.ood_head.has_value());
  CHECK(loaded.ood_head->hidden_weight.rows() == 5);
  // Serialization is canonical: dumping again gives the same bytes.
  CHECK(model_to_json(loaded) == text);
}

TEST_CASE("model JSON rejects malformed input") {
  CHECK_THROWS_AS(model_from_json("not json"), DataError);
  CHECK_THROWS_AS(model_from_json("{}"), DataError);
  const MlpModel model = mlp_init({2, 3, 2}, Activation::kRelu, 1);
  std::string text = model_to_json(model);
  // Corrupt the version field.
  const auto pos = text.find("\"format_version\": 1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, std::string("\"format_version\": 1").size(), "\"format_version\": 9");
  CHECK_THROWS_AS(model_from_json(text), DataError);
}
