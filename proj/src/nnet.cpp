// src/nnet.cpp

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

#include "woods/nnet.hpp"

#include <algorithm>
#include <cmath>

#include "woods/errors.hpp"
#include "woods/rng.hpp"

namespace woods {

namespace {

double activate(Activation act, double z) {
  switch (act) {
    case Activation::kRelu:
      return z > 0.0 ? z : 0.0;
    case Activation::kTanh:
      return std::tanh(z);
  }
  return 0.0;
}

// Derivative from the pre-activation; relu' at the kink is 0.
double activate_deriv(Activation act, double z) {
  switch (act) {
    case Activation::kRelu:
      return z > 0.0 ? 1.0 : 0.0;
    case Activation::kTanh: {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    }
  }
  return 0.0;
}

void fill_random_weights(Matrix& w, Activation act, Rng& rng) {
  const double fan_in = static_cast<double>(w.cols());
  const double fan_out = static_cast<double>(w.rows());
  // He for relu, Xavier/Glorot for tanh.
  const double stddev = act == Activation::kRelu
                            ? std::sqrt(2.0 / fan_in)
                            : std::sqrt(2.0 / (fan_in + fan_out));
  for (double& v : w.data()) v = rng.normal(0.0, stddev);
}

}  // namespace

Activation activation_from_name(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "' (expected relu or tanh)");
}

std::string activation_name(Activation act) {
  return act == Activation::kRelu ? "relu" : "tanh";
}

std::vector<std::size_t> MlpModel::layer_dims() const {
  std::vector<std::size_t> dims;
  dims.push_back(layers.front().weight.cols());
  for (const Layer& l : layers) dims.push_back(l.weight.rows());
  return dims;
}

void Gradients::scale(double s) {
  for (Layer& l : layers) {
    for (double& v : l.weight.data()) v *= s;
    for (double& v : l.bias) v *= s;
  }
  energy_slope_w *= s;
  if (ood_head) {
    for (double& v : ood_head->hidden_weight.data()) v *= s;
    for (double& v : ood_head->hidden_bias) v *= s;
    for (double& v : ood_head->output_weight) v *= s;
    ood_head->output_bias *= s;
  }
}

void Gradients::add_scaled(const Gradients& other, double s) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& w = layers[l].weight.data();
    const auto& ow = other.layers[l].weight.data();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += s * ow[i];
    for (std::size_t i = 0; i < layers[l].bias.size(); ++i) {
      layers[l].bias[i] += s * other.layers[l].bias[i];
    }
  }
  energy_slope_w += s * other.energy_slope_w;
  if (ood_head && other.ood_head) {
    auto& hw = ood_head->hidden_weight.data();
    const auto& ohw = other.ood_head->hidden_weight.data();
    for (std::size_t i = 0; i < hw.size(); ++i) hw[i] += s * ohw[i];
    for (std::size_t i = 0; i < ood_head->hidden_bias.size(); ++i) {
      ood_head->hidden_bias[i] += s * other.ood_head->hidden_bias[i];
    }
    for (std::size_t i = 0; i < ood_head->output_weight.size(); ++i) {
      ood_head->output_weight[i] += s * other.ood_head->output_weight[i];
    }
    ood_head->output_bias += s * other.ood_head->output_bias;
  }
}

Gradients zero_gradients(const MlpModel& model) {
  Gradients g;
  g.layers.reserve(model.layers.size());
  for (const Layer& l : model.layers) {
    g.layers.push_back({Matrix(l.weight.rows(), l.weight.cols()),
                        Vector(l.bias.size(), 0.0)});
  }
  if (model.ood_head) {
    const OodHead& h = *model.ood_head;
    OodHead hg;
    hg.hidden_weight = Matrix(h.hidden_weight.rows(), h.hidden_weight.cols());
    hg.hidden_bias.assign(h.hidden_bias.size(), 0.0);
    hg.output_weight.assign(h.output_weight.size(), 0.0);
    hg.output_bias = 0.0;
    g.ood_head = std::move(hg);
  }
  return g;
}

MlpModel mlp_init(const std::vector<std::size_t>& layer_dims, Activation activation,
                  std::uint64_t seed, const MlpInitOptions& options) {
  if (layer_dims.size() < 2) {
    throw ConfigError("mlp_init: need at least input and output dims, got " +
                      std::to_string(layer_dims.size()));
  }
  for (std::size_t d : layer_dims) {
    if (d == 0) throw ConfigError("mlp_init: zero layer dimension");
  }
  Rng rng(seed);
  MlpModel model;
  model.activation = activation;
  model.energy_slope_w = options.energy_slope_w;
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    Layer layer;
    layer.weight = Matrix(layer_dims[l + 1], layer_dims[l]);
    layer.bias.assign(layer_dims[l + 1], 0.0);
    fill_random_weights(layer.weight, activation, rng);
    model.layers.push_back(std::move(layer));
  }
  if (options.with_head) {
    if (options.head_hidden_dim == 0) {
      throw ConfigError("mlp_init: zero head hidden dimension");
    }
    OodHead head;
    head.hidden_weight = Matrix(options.head_hidden_dim, model.penultimate_dim());
    head.hidden_bias.assign(options.head_hidden_dim, 0.0);
    head.output_weight.assign(options.head_hidden_dim, 0.0);
    fill_random_weights(head.hidden_weight, Activation::kRelu, rng);
    // Output row gets the same fan-in scaling as a 1 x hidden relu layer.
    const double stddev = std::sqrt(2.0 / static_cast<double>(options.head_hidden_dim));
    for (double& v : head.output_weight) v = rng.normal(0.0, stddev);
    head.output_bias = 0.0;
    model.ood_head = std::move(head);
  }
  return model;
}

Vector forward(const MlpModel& model, std::span<const double> x, ForwardTrace* trace) {
  if (x.size() != model.input_dim()) {
    throw ConfigError("forward: input length " + std::to_string(x.size()) +
                      " does not match model input dim " +
                      std::to_string(model.input_dim()));
  }
  if (trace) {
    trace->input.assign(x.begin(), x.end());
    trace->pre_activations.clear();
    trace->post_activations.clear();
    trace->head_evaluated = false;
  }
  Vector a(x.begin(), x.end());
  const std::size_t num_layers = model.layers.size();
  for (std::size_t l = 0; l < num_layers; ++l) {
    Vector z = matvec(model.layers[l].weight, a);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += model.layers[l].bias[i];
    if (trace) trace->pre_activations.push_back(z);
    if (l + 1 < num_layers) {
      for (double& v : z) v = activate(model.activation, v);
      if (trace) trace->post_activations.push_back(z);
    }
    a = std::move(z);
  }
  if (trace) trace->logits = a;
  return a;
}

double head_forward(const MlpModel& model, ForwardTrace& trace) {
  if (!model.ood_head) throw ConfigError("head_forward: model has no detection head");
  const OodHead& head = *model.ood_head;
  // Penultimate activation: last hidden post-activation, or the raw input for
  // a single-layer model.
  const Vector& pen = trace.post_activations.empty() ? trace.input
                                                     : trace.post_activations.back();
  trace.head_pre = matvec(head.hidden_weight, pen);
  for (std::size_t i = 0; i < trace.head_pre.size(); ++i) {
    trace.head_pre[i] += head.hidden_bias[i];
  }
  trace.head_post = trace.head_pre;
  for (double& v : trace.head_post) v = v > 0.0 ? v : 0.0;
  double g = head.output_bias;
  for (std::size_t i = 0; i < trace.head_post.size(); ++i) {
    g += head.output_weight[i] * trace.head_post[i];
  }
  trace.head_score = g;
  trace.head_evaluated = true;
  return g;
}

void backward_accumulate(const MlpModel& model, const ForwardTrace& trace,
                         std::span<const double> d_logits, double d_head_score,
                         double scale, Gradients& out) {
  const std::size_t num_layers = model.layers.size();
  if (trace.pre_activations.size() != num_layers ||
      d_logits.size() != model.num_classes()) {
    throw ConfigError("backward: trace does not match model");
  }
  if (d_head_score != 0.0 && !trace.head_evaluated) {
    throw ConfigError("backward: head gradient supplied without head forward");
  }

  // delta = dLoss/dz for the layer currently being processed.
  Vector delta(d_logits.begin(), d_logits.end());
  // dLoss/d(post-activation of layer l-1), accumulated from the final layer
  // and (for the penultimate activation) the detection head.
  for (std::size_t li = num_layers; li-- > 0;) {
    const Layer& layer = model.layers[li];
    const Vector& below =
        li == 0 ? trace.input : trace.post_activations[li - 1];
    add_outer(out.layers[li].weight, delta, below, scale);
    for (std::size_t i = 0; i < delta.size(); ++i) {
      out.layers[li].bias[i] += scale * delta[i];
    }
    if (li == 0) break;
    Vector da = matvec_transpose(layer.weight, delta);
    if (li == num_layers - 1 && trace.head_evaluated && d_head_score != 0.0) {
      const OodHead& head = *model.ood_head;
      // Head backward: through the output row and the relu hidden layer.
      Vector head_delta(head.output_weight.size());
      for (std::size_t i = 0; i < head_delta.size(); ++i) {
        head_delta[i] =
            d_head_score * head.output_weight[i] * (trace.head_pre[i] > 0.0 ? 1.0 : 0.0);
        out.ood_head->output_weight[i] += scale * d_head_score * trace.head_post[i];
      }
      out.ood_head->output_bias += scale * d_head_score;
      add_outer(out.ood_head->hidden_weight, head_delta, below, scale);
      for (std::size_t i = 0; i < head_delta.size(); ++i) {
        out.ood_head->hidden_bias[i] += scale * head_delta[i];
      }
      const Vector da_head = matvec_transpose(head.hidden_weight, head_delta);
      for (std::size_t i = 0; i < da.size(); ++i) da[i] += da_head[i];
    }
    const Vector& z_prev = trace.pre_activations[li - 1];
    delta.resize(da.size());
    for (std::size_t i = 0; i < da.size(); ++i) {
      delta[i] = da[i] * activate_deriv(model.activation, z_prev[i]);
    }
  }
  // A single-layer model still needs head gradients when requested.
  if (num_layers == 1 && trace.head_evaluated && d_head_score != 0.0) {
    const OodHead& head = *model.ood_head;
    Vector head_delta(head.output_weight.size());
    for (std::size_t i = 0; i < head_delta.size(); ++i) {
      head_delta[i] =
          d_head_score * head.output_weight[i] * (trace.head_pre[i] > 0.0 ? 1.0 : 0.0);
      out.ood_head->output_weight[i] += scale * d_head_score * trace.head_post[i];
    }
    out.ood_head->output_bias += scale * d_head_score;
    add_outer(out.ood_head->hidden_weight, head_delta, trace.input, scale);
    for (std::size_t i = 0; i < head_delta.size(); ++i) {
      out.ood_head->hidden_bias[i] += scale * head_delta[i];
    }
  }
}

Gradients backward(const MlpModel& model, const ForwardTrace& trace,
                   std::span<const double> d_logits, double d_head_score) {
  Gradients g = zero_gradients(model);
  backward_accumulate(model, trace, d_logits, d_head_score, 1.0, g);
  return g;
}

OptimizerState optimizer_init(const MlpModel& model, double learning_rate,
                              double momentum, double weight_decay, bool nesterov) {
  if (learning_rate <= 0.0) throw ConfigError("optimizer: learning rate must be > 0");
  if (momentum < 0.0 || momentum >= 1.0) {
    throw ConfigError("optimizer: momentum must be in [0, 1)");
  }
  if (weight_decay < 0.0) throw ConfigError("optimizer: weight decay must be >= 0");
  OptimizerState opt;
  opt.velocity = zero_gradients(model);
  opt.learning_rate = learning_rate;
  opt.momentum = momentum;
  opt.weight_decay = weight_decay;
  opt.nesterov = nesterov;
  return opt;
}

std::vector<ParamSlot> param_slots(MlpModel& model) {
  std::vector<ParamSlot> slots;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    Layer& layer = model.layers[l];
    for (std::size_t i = 0; i < layer.weight.size(); ++i) {
      slots.push_back({&layer.weight.data()[i], true,
                       "layers[" + std::to_string(l) + "].weight[" + std::to_string(i) + "]"});
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      slots.push_back({&layer.bias[i], false,
                       "layers[" + std::to_string(l) + "].bias[" + std::to_string(i) + "]"});
    }
  }
  slots.push_back({&model.energy_slope_w, false, "energy_slope_w"});
  if (model.ood_head) {
    OodHead& h = *model.ood_head;
    for (std::size_t i = 0; i < h.hidden_weight.size(); ++i) {
      slots.push_back({&h.hidden_weight.data()[i], true,
                       "ood_head.hidden_weight[" + std::to_string(i) + "]"});
    }
    for (std::size_t i = 0; i < h.hidden_bias.size(); ++i) {
      slots.push_back({&h.hidden_bias[i], false,
                       "ood_head.hidden_bias[" + std::to_string(i) + "]"});
    }
    for (std::size_t i = 0; i < h.output_weight.size(); ++i) {
      slots.push_back({&h.output_weight[i], true,
                       "ood_head.output_weight[" + std::to_string(i) + "]"});
    }
    slots.push_back({&h.output_bias, false, "ood_head.output_bias"});
  }
  return slots;
}

std::vector<ParamSlot> param_slots(Gradients& grads) {
  // Same walk as the model overload; Gradients mirrors the model shape, so we
  // rebuild the slots directly.
  std::vector<ParamSlot> slots;
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    Layer& layer = grads.layers[l];
    for (std::size_t i = 0; i < layer.weight.size(); ++i) {
      slots.push_back({&layer.weight.data()[i], true,
                       "layers[" + std::to_string(l) + "].weight[" + std::to_string(i) + "]"});
    }
    for (std::size_t i = 0; i < layer.bias.size(); ++i) {
      slots.push_back({&layer.bias[i], false,
                       "layers[" + std::to_string(l) + "].bias[" + std::to_string(i) + "]"});
    }
  }
  slots.push_back({&grads.energy_slope_w, false, "energy_slope_w"});
  if (grads.ood_head) {
    OodHead& h = *grads.ood_head;
    for (std::size_t i = 0; i < h.hidden_weight.size(); ++i) {
      slots.push_back({&h.hidden_weight.data()[i], true,
                       "ood_head.hidden_weight[" + std::to_string(i) + "]"});
    }
    for (std::size_t i = 0; i < h.hidden_bias.size(); ++i) {
      slots.push_back({&h.hidden_bias[i], false,
                       "ood_head.hidden_bias[" + std::to_string(i) + "]"});
    }
    for (std::size_t i = 0; i < h.output_weight.size(); ++i) {
      slots.push_back({&h.output_weight[i], true,
                       "ood_head.output_weight[" + std::to_string(i) + "]"});
    }
    slots.push_back({&h.output_bias, false, "ood_head.output_bias"});
  }
  return slots;
}

void sgd_step(MlpModel& model, const Gradients& grads, OptimizerState& opt) {
  std::vector<ParamSlot> params = param_slots(model);
  std::vector<ParamSlot> gs = param_slots(const_cast<Gradients&>(grads));
  std::vector<ParamSlot> vs = param_slots(opt.velocity);
  if (params.size() != gs.size() || params.size() != vs.size()) {
    throw ConfigError("sgd_step: gradient/velocity shape mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = *gs[i].value;
    if (!std::isfinite(g)) {
      throw NumericError("sgd_step: non-finite gradient at " + gs[i].path);
    }
    // Weight decay only touches weight matrices: decaying biases has no
    // regularization effect worth the coupling, and decaying energy_slope_w
    // would fight the detection constraint.
    double adjusted = g;
    if (params[i].is_weight && opt.weight_decay != 0.0) {
      adjusted += opt.weight_decay * *params[i].value;
    }
    double& v = *vs[i].value;
    v = opt.momentum * v + adjusted;
    const double d = opt.nesterov ? adjusted + opt.momentum * v : v;
    *params[i].value -= opt.learning_rate * d;
  }
}

FiniteDiffReport finite_diff_check(
    MlpModel model, const std::function<double(const MlpModel&)>& loss_fn,
    const std::function<Gradients(const MlpModel&)>& grad_fn,
    std::size_t num_coords, std::uint64_t seed, double step) {
  Gradients analytic = grad_fn(model);
  std::vector<ParamSlot> params = param_slots(model);
  std::vector<ParamSlot> gs = param_slots(analytic);

  Rng rng(seed);
  FiniteDiffReport report;
  for (std::size_t k = 0; k < num_coords; ++k) {
    const std::size_t i = rng.index(params.size());
    double& p = *params[i].value;
    const double saved = p;
    p = saved + step;
    const double up = loss_fn(model);
    p = saved - step;
    const double down = loss_fn(model);
    p = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double a = *gs[i].value;
    const double rel =
        std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-4});
    if (rel > report.max_rel_err) {
      report.max_rel_err = rel;
      report.worst_param = params[i].path;
    }
    ++report.coords_checked;
  }
  return report;
}

}  // namespace woods
