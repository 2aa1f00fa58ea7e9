// include/woods/alm.hpp

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

#ifndef WOODS_ALM_HPP_
#define WOODS_ALM_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "woods/data.hpp"
#include "woods/nnet.hpp"
#include "woods/numeric.hpp"

namespace woods {

// Inequality-constraint budgets: mean detection loss on ID data must stay
// below alpha, mean classification loss below tau; tol is the slack used by
// the penalty schedule.
struct ConstraintSpec {
  double alpha = 0.05;
  double tau = 1.0;
  double tol = 0.05;

  void validate() const;
};

// Dual variables, penalty weights, and their update hyperparameters.
// lambda starts at (0, 0) and beta at (1, 1): with zero multipliers the
// first epoch is a pure penalty step.
struct AlmState {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double beta1 = 1.0;
  double beta2 = 1.0;
  double gamma = 1.5;  // penalty multiplier, > 1
  double mu2 = 1.0;    // dual ascent learning rate

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double ood_constraint = 0.0;  // full-ID mean detection loss (raw, not minus alpha)
  double cls_constraint = 0.0;  // full-ID mean classification loss
  double objective = 0.0;       // full-wild mean objective loss
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
};

struct TrainConfig {
  int epochs = 50;
  int batch_size = 128;
  // Batch steps per epoch (T - 1). 0 means derive from the ID dataset:
  // T = max(2, ceil(n / B)).
  int steps_per_epoch = 0;
  double mu1 = 0.01;  // SGD learning rate
  double momentum = 0.9;
  bool nesterov = true;
  double weight_decay = 0.0005;
  // Halve mu1 after 50%, 75%, and 90% of the epochs.
  bool lr_decay = false;
  std::uint64_t seed = 0;

  void validate() const;
  int resolve_steps(std::size_t id_size) const;
};

// Piecewise augmented-Lagrangian penalty for one inequality constraint:
//   psi_beta(u, v) = u v + (beta/2) u^2   if beta u + v >= 0
//                  = -v^2 / (2 beta)      otherwise
double psi(double u, double v, double beta);

struct PsiGrad {
  double du = 0.0;
  double dv = 0.0;
};
// (v + beta u, u) on the first branch, (0, -v/beta) on the second; the
// branches agree at beta u + v = 0, so psi is C1.
PsiGrad psi_grad(double u, double v, double beta);

// Which detection loss the constrained problem is built from.
enum class OodLossKind {
  kEnergySigmoid,  // sigmoid of w * energy
  kNnHead,         // hinge losses on the detection-head score
};

struct BatchLossResult {
  double value = 0.0;
  Gradients grads;
};

// Per-batch surrogate Lagrangian:
//   mean in-loss over the wild batch
//   + psi_beta1(mean out-loss over the ID batch - alpha, lambda1)
//   + psi_beta2(mean cls-loss over the ID batch - tau, lambda2)
// Gradients flow through psi's first argument into the network parameters
// and energy_slope_w; lambda and beta are treated as constants.
BatchLossResult batch_lagrangian(const MlpModel& model, const LabeledDataset& id_data,
                                 std::span<const std::size_t> id_idx,
                                 const std::vector<Vector>& wild_features,
                                 std::span<const std::size_t> wild_idx,
                                 const ConstraintSpec& spec, const AlmState& state,
                                 OodLossKind kind = OodLossKind::kEnergySigmoid);

// Whole-dataset convenience overload.
BatchLossResult batch_lagrangian(const MlpModel& model, const LabeledDataset& id_data,
                                 const std::vector<Vector>& wild_features,
                                 const ConstraintSpec& spec, const AlmState& state,
                                 OodLossKind kind = OodLossKind::kEnergySigmoid);

struct ConstraintValues {
  double ood = 0.0;  // mean detection out-loss on the full ID set
  double cls = 0.0;  // mean classification loss on the full ID set
};
ConstraintValues full_constraint_values(const MlpModel& model,
                                        const LabeledDataset& id_data,
                                        OodLossKind kind);
double full_objective(const MlpModel& model, const std::vector<Vector>& wild_features,
                      OodLossKind kind);

// Dual ascent on lambda using the constraint values measured on the full ID
// training set: lambda_i += mu2 * dpsi/dv(value_i - budget_i, lambda_i).
void dual_ascent_update(AlmState& state, const ConstraintSpec& spec,
                        double full_id_constraint_ood, double full_id_constraint_cls);

// Multiply beta_i by gamma when its constraint is violated beyond tol
// (strict inequality). beta never decreases.
void penalty_update(AlmState& state, const ConstraintSpec& spec,
                    double full_id_constraint_ood, double full_id_constraint_cls);

// The full constrained training loop: per epoch, T-1 stochastic Lagrangian
// steps on independently sampled ID and wild batches, then dual ascent and
// the penalty update using exact full-ID constraint values.
std::pair<MlpModel, std::vector<EpochLog>> woods_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>& wild_features, const ConstraintSpec& spec,
    AlmState state, const TrainConfig& config);

// Same loop with the hinge detection head instead of the sigmoid-energy
// loss; requires a model with a head.
std::pair<MlpModel, std::vector<EpochLog>> woods_nn_head_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>& wild_features, const ConstraintSpec& spec,
    AlmState state, const TrainConfig& config);

// --- Deterministic reference solver on toy convex problems ----------------

struct ToyProblem {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> objective;
  std::function<Vector(std::span<const double>)> objective_grad;
  struct Constraint {
    std::function<double(std::span<const double>)> value;  // c(x) <= 0
    std::function<Vector(std::span<const double>)> grad;
  };
  std::vector<Constraint> constraints;
  Vector start;
};

struct RefSolveSchedule {
  int outer_iters = 100;
  int max_inner_iters = 1000;
  double inner_tol = 1e-9;  // on the inner gradient inf-norm
  double mu2 = 1.0;
  double beta0 = 1.0;
  double gamma = 2.0;
  double beta_max = 1e8;
};

// Classic two-step ALM (inner argmin by backtracking gradient descent, then
// dual ascent); self-test for the stochastic trainer. Throws NumericError
// if the iterate inf-norm exceeds 1e6.
Vector alm_reference_solve(const ToyProblem& problem, const RefSolveSchedule& schedule);

}  // namespace woods

#endif  // WOODS_ALM_HPP_
