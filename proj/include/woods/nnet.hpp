// include/woods/nnet.hpp

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

#ifndef WOODS_NNET_HPP_
#define WOODS_NNET_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "woods/matrix.hpp"
#include "woods/numeric.hpp"

namespace woods {

enum class Activation { kRelu, kTanh };

Activation activation_from_name(const std::string& name);
std::string activation_name(Activation act);

struct Layer {
  Matrix weight;  // out_dim x in_dim
  Vector bias;    // out_dim
};

// Detection head attached to the penultimate activation: one hidden layer
// followed by relu and a single output logit.
struct OodHead {
  Matrix hidden_weight;  // hidden x penultimate
  Vector hidden_bias;    // hidden
  Vector output_weight;  // hidden
  double output_bias = 0.0;
};

// Feedforward classifier plus the learnable sigmoid slope w and the optional
// detection head. All trainable parameters live here.
struct MlpModel {
  std::vector<Layer> layers;
  Activation activation = Activation::kRelu;
  double energy_slope_w = -1.0;
  std::optional<OodHead> ood_head;

  std::size_t input_dim() const { return layers.front().weight.cols(); }
  std::size_t num_classes() const { return layers.back().weight.rows(); }
  // Input dimension of the final linear layer; the head attaches here.
  std::size_t penultimate_dim() const { return layers.back().weight.cols(); }
  std::vector<std::size_t> layer_dims() const;
};

// Parameter-shaped container for gradients (and optimizer velocity).
struct Gradients {
  std::vector<Layer> layers;
  double energy_slope_w = 0.0;
  std::optional<OodHead> ood_head;

  void scale(double s);
  void add_scaled(const Gradients& other, double s);
};

Gradients zero_gradients(const MlpModel& model);

struct MlpInitOptions {
  bool with_head = false;
  std::size_t head_hidden_dim = 300;
  double energy_slope_w = -1.0;
};

// He-scaled normal init for relu, Xavier for tanh; biases zero.
MlpModel mlp_init(const std::vector<std::size_t>& layer_dims, Activation activation,
                  std::uint64_t seed, const MlpInitOptions& options = {});

// Everything backward() needs, cached by forward().
struct ForwardTrace {
  Vector input;
  std::vector<Vector> pre_activations;   // z_l, one per layer
  std::vector<Vector> post_activations;  // act(z_l), hidden layers only
  Vector logits;
  // Head cache; filled only when the head was evaluated.
  bool head_evaluated = false;
  Vector head_pre;   // hidden pre-activation
  Vector head_post;  // relu(head_pre)
  double head_score = 0.0;
};

Vector forward(const MlpModel& model, std::span<const double> x,
               ForwardTrace* trace = nullptr);

// Head score g for one input; also fills the head fields of an existing
// trunk trace so backward can reach the head parameters.
double head_forward(const MlpModel& model, ForwardTrace& trace);

// Accumulates scale * d(loss)/d(params) into `out`, where the scalar loss
// reaches the parameters through d_logits (and d_head_score when the head
// was evaluated). energy_slope_w receives nothing here: its gradient does
// not flow through the network and is accumulated directly by callers.
void backward_accumulate(const MlpModel& model, const ForwardTrace& trace,
                         std::span<const double> d_logits, double d_head_score,
                         double scale, Gradients& out);

Gradients backward(const MlpModel& model, const ForwardTrace& trace,
                   std::span<const double> d_logits, double d_head_score = 0.0);

struct OptimizerState {
  Gradients velocity;
  double learning_rate = 0.01;
  double momentum = 0.9;
  double weight_decay = 0.0;
  bool nesterov = true;
};

OptimizerState optimizer_init(const MlpModel& model, double learning_rate,
                              double momentum = 0.9, double weight_decay = 0.0,
                              bool nesterov = true);

// One SGD step with Nesterov momentum:
//   g~ = g + wd * theta   (weight matrices only; never biases or w)
//   v  = momentum * v + g~
//   d  = nesterov ? g~ + momentum * v : v
//   theta -= learning_rate * d
// Throws NumericError naming the offending parameter on non-finite gradients.
void sgd_step(MlpModel& model, const Gradients& grads, OptimizerState& opt);

struct FiniteDiffReport {
  double max_rel_err = 0.0;
  std::size_t coords_checked = 0;
  std::string worst_param;
};

// Compares grad_fn against central finite differences of loss_fn over
// `num_coords` randomly chosen parameter coordinates. Report only.
FiniteDiffReport finite_diff_check(
    MlpModel model, const std::function<double(const MlpModel&)>& loss_fn,
    const std::function<Gradients(const MlpModel&)>& grad_fn,
    std::size_t num_coords, std::uint64_t seed, double step = 1e-5);

// Flat parameter access shared by sgd_step, finite_diff_check, and the
// serializer; both overloads enumerate slots in the same canonical order.
struct ParamSlot {
  double* value;
  bool is_weight;  // subject to weight decay
  std::string path;
};
std::vector<ParamSlot> param_slots(MlpModel& model);
std::vector<ParamSlot> param_slots(Gradients& grads);

}  // namespace woods

#endif  // WOODS_NNET_HPP_
