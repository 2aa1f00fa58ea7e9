// src/alm.cpp

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

#include "woods/alm.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "woods/errors.hpp"
#include "woods/losses.hpp"
#include "woods/rng.hpp"

namespace woods {

void ConstraintSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ConfigError("constraint spec: alpha must be in (0, 1)");
  }
  if (tau < 0.0) throw ConfigError("constraint spec: tau must be >= 0");
  if (tol < 0.0) throw ConfigError("constraint spec: tol must be >= 0");
}

void AlmState::validate() const {
  if (beta1 <= 0.0 || beta2 <= 0.0) throw ConfigError("alm state: beta must be > 0");
  if (gamma <= 1.0) throw ConfigError("alm state: gamma must be > 1");
  if (mu2 <= 0.0) throw ConfigError("alm state: mu2 must be > 0");
}

void TrainConfig::validate() const {
  if (epochs < 0) throw ConfigError("train config: negative epochs");
  if (batch_size <= 0) throw ConfigError("train config: batch size must be > 0");
  if (steps_per_epoch < 0) throw ConfigError("train config: negative steps_per_epoch");
  if (mu1 <= 0.0) throw ConfigError("train config: mu1 must be > 0");
}

int TrainConfig::resolve_steps(std::size_t id_size) const {
  if (steps_per_epoch > 0) return steps_per_epoch;
  const std::size_t b = static_cast<std::size_t>(batch_size);
  const std::size_t t = std::max<std::size_t>(2, (id_size + b - 1) / b);
  return static_cast<int>(t - 1);
}

double psi(double u, double v, double beta) {
  if (beta <= 0.0) throw ConfigError("psi: beta must be > 0");
  if (beta * u + v >= 0.0) {
    return u * v + 0.5 * beta * u * u;
  }
  return -v * v / (2.0 * beta);
}

PsiGrad psi_grad(double u, double v, double beta) {
  if (beta <= 0.0) throw ConfigError("psi_grad: beta must be > 0");
  if (beta * u + v >= 0.0) {
    return {v + beta * u, u};
  }
  return {0.0, -v / beta};
}

namespace {

struct PerSample {
  ForwardTrace trace;
  Vector d_logits;       // accumulated weighted gradient w.r.t. logits
  double d_head = 0.0;   // accumulated weighted gradient w.r.t. head score
};

}  // namespace

BatchLossResult batch_lagrangian(const MlpModel& model, const LabeledDataset& id_data,
                                 std::span<const std::size_t> id_idx,
                                 const std::vector<Vector>& wild_features,
                                 std::span<const std::size_t> wild_idx,
                                 const ConstraintSpec& spec, const AlmState& state,
                                 OodLossKind kind) {
  if (id_idx.empty() || wild_idx.empty()) {
    throw ConfigError("batch_lagrangian: empty batch");
  }
  spec.validate();
  state.validate();
  if (kind == OodLossKind::kNnHead && !model.ood_head) {
    throw ConfigError("batch_lagrangian: nn-head loss requires a model with a head");
  }
  const double w = model.energy_slope_w;
  const double inv_wild = 1.0 / static_cast<double>(wild_idx.size());
  const double inv_id = 1.0 / static_cast<double>(id_idx.size());

  // Pass 1: forward everything, collect per-sample loss values and the raw
  // per-sample gradient pieces. The psi weights depend on batch means, so
  // gradients can only be scaled afterwards.
  std::vector<PerSample> wild_samples(wild_idx.size());
  Vector in_losses(wild_idx.size());
  double d_w_objective = 0.0;  // d(mean in-loss)/dw
  for (std::size_t i = 0; i < wild_idx.size(); ++i) {
    PerSample& s = wild_samples[i];
    const Vector logits = forward(model, wild_features[wild_idx[i]], &s.trace);
    if (kind == OodLossKind::kEnergySigmoid) {
      const EnergyScore energy = energy_score_with_grad(logits);
      const ScalarOodLoss loss = ood_loss_in(energy.value, w);
      in_losses[i] = loss.value;
      s.d_logits.resize(logits.size());
      for (std::size_t j = 0; j < logits.size(); ++j) {
        s.d_logits[j] = inv_wild * loss.grad_score * energy.grad_logits[j];
      }
      d_w_objective += inv_wild * loss.grad_w;
    } else {
      const double g = head_forward(model, s.trace);
      const HingePair hinge = hinge_head_losses(g);
      in_losses[i] = hinge.loss_in;
      s.d_logits.assign(logits.size(), 0.0);
      s.d_head = inv_wild * hinge.grad_in;
    }
  }

  std::vector<PerSample> id_samples(id_idx.size());
  Vector out_losses(id_idx.size());
  Vector cls_losses(id_idx.size());
  std::vector<Vector> out_grad_logits(id_idx.size());  // detection part, unscaled
  Vector out_grad_head(id_idx.size(), 0.0);
  std::vector<Vector> cls_grad_logits(id_idx.size());
  double d_w_constraint = 0.0;  // d(mean out-loss)/dw
  for (std::size_t i = 0; i < id_idx.size(); ++i) {
    PerSample& s = id_samples[i];
    const std::size_t row = id_idx[i];
    const Vector logits = forward(model, id_data.features[row], &s.trace);
    const CrossEntropyLoss ce = cross_entropy(logits, id_data.labels[row]);
    cls_losses[i] = ce.value;
    cls_grad_logits[i] = ce.grad_logits;
    if (kind == OodLossKind::kEnergySigmoid) {
      const EnergyScore energy = energy_score_with_grad(logits);
      const ScalarOodLoss loss = ood_loss_out(energy.value, w);
      out_losses[i] = loss.value;
      out_grad_logits[i].resize(logits.size());
      for (std::size_t j = 0; j < logits.size(); ++j) {
        out_grad_logits[i][j] = loss.grad_score * energy.grad_logits[j];
      }
      d_w_constraint += inv_id * loss.grad_w;
    } else {
      const double g = head_forward(model, s.trace);
      const HingePair hinge = hinge_head_losses(g);
      out_losses[i] = hinge.loss_out;
      out_grad_logits[i].assign(logits.size(), 0.0);
      out_grad_head[i] = hinge.grad_out;
    }
  }

  const double objective = pairwise_mean(in_losses);
  const double mean_out = pairwise_mean(out_losses);
  const double mean_cls = pairwise_mean(cls_losses);
  const double u1 = mean_out - spec.alpha;
  const double u2 = mean_cls - spec.tau;
  const double psi1 = psi(u1, state.lambda1, state.beta1);
  const double psi2 = psi(u2, state.lambda2, state.beta2);
  const double dpsi1_du = psi_grad(u1, state.lambda1, state.beta1).du;
  const double dpsi2_du = psi_grad(u2, state.lambda2, state.beta2).du;

  BatchLossResult result;
  result.value = objective + psi1 + psi2;
  result.grads = zero_gradients(model);

  for (std::size_t i = 0; i < id_idx.size(); ++i) {
    PerSample& s = id_samples[i];
    s.d_logits.resize(cls_grad_logits[i].size());
    for (std::size_t j = 0; j < s.d_logits.size(); ++j) {
      s.d_logits[j] = inv_id * (dpsi1_du * out_grad_logits[i][j] +
                                dpsi2_du * cls_grad_logits[i][j]);
    }
    s.d_head = inv_id * dpsi1_du * out_grad_head[i];
  }

  for (const PerSample& s : wild_samples) {
    backward_accumulate(model, s.trace, s.d_logits, s.d_head, 1.0, result.grads);
  }
  for (const PerSample& s : id_samples) {
    backward_accumulate(model, s.trace, s.d_logits, s.d_head, 1.0, result.grads);
  }
  result.grads.energy_slope_w = d_w_objective + dpsi1_du * d_w_constraint;
  return result;
}

BatchLossResult batch_lagrangian(const MlpModel& model, const LabeledDataset& id_data,
                                 const std::vector<Vector>& wild_features,
                                 const ConstraintSpec& spec, const AlmState& state,
                                 OodLossKind kind) {
  std::vector<std::size_t> id_idx(id_data.size());
  std::iota(id_idx.begin(), id_idx.end(), 0);
  std::vector<std::size_t> wild_idx(wild_features.size());
  std::iota(wild_idx.begin(), wild_idx.end(), 0);
  return batch_lagrangian(model, id_data, id_idx, wild_features, wild_idx, spec, state,
                          kind);
}

ConstraintValues full_constraint_values(const MlpModel& model,
                                        const LabeledDataset& id_data,
                                        OodLossKind kind) {
  const std::size_t n = id_data.size();
  if (n == 0) throw ConfigError("full_constraint_values: empty ID dataset");
  Vector out_losses(n);
  Vector cls_losses(n);
  ForwardTrace trace;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector logits = forward(model, id_data.features[i], &trace);
    cls_losses[i] = cross_entropy(logits, id_data.labels[i]).value;
    if (kind == OodLossKind::kEnergySigmoid) {
      out_losses[i] = ood_loss_out(energy_score(logits), model.energy_slope_w).value;
    } else {
      out_losses[i] = hinge_head_losses(head_forward(model, trace)).loss_out;
    }
  }
  return {pairwise_mean(out_losses), pairwise_mean(cls_losses)};
}

double full_objective(const MlpModel& model, const std::vector<Vector>& wild_features,
                      OodLossKind kind) {
  if (wild_features.empty()) throw ConfigError("full_objective: empty wild dataset");
  Vector in_losses(wild_features.size());
  ForwardTrace trace;
  for (std::size_t i = 0; i < wild_features.size(); ++i) {
    const Vector logits = forward(model, wild_features[i], &trace);
    if (kind == OodLossKind::kEnergySigmoid) {
      in_losses[i] = ood_loss_in(energy_score(logits), model.energy_slope_w).value;
    } else {
      in_losses[i] = hinge_head_losses(head_forward(model, trace)).loss_in;
    }
  }
  return pairwise_mean(in_losses);
}

void dual_ascent_update(AlmState& state, const ConstraintSpec& spec,
                        double full_id_constraint_ood, double full_id_constraint_cls) {
  const double u1 = full_id_constraint_ood - spec.alpha;
  const double u2 = full_id_constraint_cls - spec.tau;
  state.lambda1 += state.mu2 * psi_grad(u1, state.lambda1, state.beta1).dv;
  state.lambda2 += state.mu2 * psi_grad(u2, state.lambda2, state.beta2).dv;
}

void penalty_update(AlmState& state, const ConstraintSpec& spec,
                    double full_id_constraint_ood, double full_id_constraint_cls) {
  if (full_id_constraint_ood > spec.alpha + spec.tol) state.beta1 *= state.gamma;
  if (full_id_constraint_cls > spec.tau + spec.tol) state.beta2 *= state.gamma;
}

namespace {

std::pair<MlpModel, std::vector<EpochLog>> run_constrained_training(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>& wild_features, const ConstraintSpec& spec,
    AlmState state, const TrainConfig& config, OodLossKind kind) {
  spec.validate();
  state.validate();
  config.validate();
  if (id_data.size() == 0 || wild_features.empty()) {
    throw ConfigError("constrained training: empty dataset");
  }
  if (id_data.num_classes < 2) {
    throw ConfigError("constrained training: need K >= 2 classes");
  }
  if (kind == OodLossKind::kNnHead && !model.ood_head) {
    throw ConfigError("nn-head training requires a model with a head");
  }

  std::vector<EpochLog> logs;
  if (config.epochs == 0) return {std::move(model), std::move(logs)};

  OptimizerState opt = optimizer_init(model, config.mu1, config.momentum,
                                      config.weight_decay, config.nesterov);
  Rng id_rng(config.seed);
  Rng wild_rng(derive_seed(config.seed, 1));
  const int steps = config.resolve_steps(id_data.size());
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);

  std::vector<std::size_t> id_idx(batch);
  std::vector<std::size_t> wild_idx(batch);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.lr_decay) {
      int halvings = 0;
      for (double frac : {0.5, 0.75, 0.9}) {
        if (static_cast<double>(epoch - 1) >= frac * config.epochs) ++halvings;
      }
      opt.learning_rate = config.mu1 * std::pow(0.5, halvings);
    }
    for (int step = 0; step < steps; ++step) {
      for (std::size_t& i : id_idx) i = id_rng.index(id_data.size());
      for (std::size_t& i : wild_idx) i = wild_rng.index(wild_features.size());
      BatchLossResult batch_loss =
          batch_lagrangian(model, id_data, id_idx, wild_features, wild_idx, spec,
                           state, kind);
      if (!std::isfinite(batch_loss.value)) {
        throw NumericError("constrained training: non-finite loss at epoch " +
                           std::to_string(epoch) + " batch " + std::to_string(step + 1));
      }
      sgd_step(model, batch_loss.grads, opt);
    }
    const ConstraintValues values = full_constraint_values(model, id_data, kind);
    const double objective = full_objective(model, wild_features, kind);
    dual_ascent_update(state, spec, values.ood, values.cls);
    penalty_update(state, spec, values.ood, values.cls);
    logs.push_back({epoch, values.ood, values.cls, objective, state.lambda1,
                    state.lambda2, state.beta1, state.beta2});
  }
  return {std::move(model), std::move(logs)};
}

}  // namespace

std::pair<MlpModel, std::vector<EpochLog>> woods_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>& wild_features, const ConstraintSpec& spec,
    AlmState state, const TrainConfig& config) {
  return run_constrained_training(std::move(model), id_data, wild_features, spec,
                                  std::move(state), config,
                                  OodLossKind::kEnergySigmoid);
}

std::pair<MlpModel, std::vector<EpochLog>> woods_nn_head_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>& wild_features, const ConstraintSpec& spec,
    AlmState state, const TrainConfig& config) {
  return run_constrained_training(std::move(model), id_data, wild_features, spec,
                                  std::move(state), config, OodLossKind::kNnHead);
}

namespace {

double toy_lagrangian(const ToyProblem& problem, std::span<const double> x,
                      const Vector& lambda, double beta) {
  double value = problem.objective(x);
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    value += psi(problem.constraints[i].value(x), lambda[i], beta);
  }
  return value;
}

Vector toy_lagrangian_grad(const ToyProblem& problem, std::span<const double> x,
                           const Vector& lambda, double beta) {
  Vector grad = problem.objective_grad(x);
  for (std::size_t i = 0; i < problem.constraints.size(); ++i) {
    const double c = problem.constraints[i].value(x);
    const double du = psi_grad(c, lambda[i], beta).du;
    if (du != 0.0) {
      const Vector cg = problem.constraints[i].grad(x);
      for (std::size_t j = 0; j < grad.size(); ++j) grad[j] += du * cg[j];
    }
  }
  return grad;
}

double inf_norm(const Vector& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Vector alm_reference_solve(const ToyProblem& problem, const RefSolveSchedule& schedule) {
  if (problem.dim == 0 || problem.dim > 10) {
    throw ConfigError("alm_reference_solve: dimension must be in [1, 10]");
  }
  if (problem.start.size() != problem.dim) {
    throw ConfigError("alm_reference_solve: start point has wrong dimension");
  }
  Vector x = problem.start;
  Vector lambda(problem.constraints.size(), 0.0);
  double beta = schedule.beta0;

  for (int outer = 0; outer < schedule.outer_iters; ++outer) {
    // Inner argmin by gradient descent with Armijo backtracking.
    for (int inner = 0; inner < schedule.max_inner_iters; ++inner) {
      const Vector grad = toy_lagrangian_grad(problem, x, lambda, beta);
      const double gnorm = inf_norm(grad);
      if (gnorm <= schedule.inner_tol) break;
      const double f0 = toy_lagrangian(problem, x, lambda, beta);
      double g2 = 0.0;
      for (double g : grad) g2 += g * g;
      double step = 1.0;
      Vector candidate(x.size());
      while (true) {
        for (std::size_t j = 0; j < x.size(); ++j) candidate[j] = x[j] - step * grad[j];
        if (toy_lagrangian(problem, candidate, lambda, beta) <= f0 - 1e-4 * step * g2) {
          break;
        }
        step *= 0.5;
        if (step < 1e-18) break;  // flat to machine precision
      }
      x = candidate;
      if (inf_norm(x) > 1e6) {
        throw NumericError("alm_reference_solve: iterate diverged");
      }
    }
    for (std::size_t i = 0; i < lambda.size(); ++i) {
      lambda[i] += schedule.mu2 * psi_grad(problem.constraints[i].value(x), lambda[i], beta).dv;
    }
    beta = std::min(beta * schedule.gamma, schedule.beta_max);
  }
  return x;
}

}  // namespace woods
