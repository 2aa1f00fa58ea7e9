// src/losses.cpp

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

#include "woods/losses.hpp"

#include <algorithm>
#include <cmath>

#include "woods/errors.hpp"

namespace woods {

namespace {

double max_logit(std::span<const double> logits) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  return m;
}

}  // namespace

Vector softmax(std::span<const double> logits) {
  const double m = max_logit(logits);
  Vector p(logits.size());
  double denom = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    denom += p[i];
  }
  for (double& v : p) v /= denom;
  return p;
}

CrossEntropyLoss cross_entropy(std::span<const double> logits, std::size_t label) {
  if (label >= logits.size()) {
    throw ConfigError("cross_entropy: label " + std::to_string(label) +
                      " out of range for " + std::to_string(logits.size()) + " classes");
  }
  const double m = max_logit(logits);
  double denom = 0.0;
  for (double v : logits) denom += std::exp(v - m);
  CrossEntropyLoss out;
  // -log softmax_y = log(sum exp(z - m)) - (z_y - m)
  out.value = std::log(denom) - (logits[label] - m);
  out.grad_logits.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.grad_logits[i] = std::exp(logits[i] - m) / denom;
  }
  out.grad_logits[label] -= 1.0;
  return out;
}

double energy_score(std::span<const double> logits) {
  const double m = max_logit(logits);
  double s = 0.0;
  for (double v : logits) s += std::exp(v - m);
  return m + std::log(s);
}

EnergyScore energy_score_with_grad(std::span<const double> logits) {
  EnergyScore out;
  out.value = energy_score(logits);
  out.grad_logits = softmax(logits);
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

ScalarOodLoss ood_loss_in(double score, double w) {
  ScalarOodLoss out;
  const double s = sigmoid(w * score);
  const double slope = s * (1.0 - s);  // sigma'(w * score)
  out.value = s;
  out.grad_score = w * slope;
  out.grad_w = score * slope;
  return out;
}

ScalarOodLoss ood_loss_out(double score, double w) {
  ScalarOodLoss out;
  const double s = sigmoid(-w * score);
  const double slope = s * (1.0 - s);
  out.value = s;
  out.grad_score = -w * slope;
  out.grad_w = -score * slope;
  return out;
}

HingePair hinge_head_losses(double g) {
  HingePair out;
  out.loss_in = std::max(1.0 - g, 0.0);
  out.loss_out = std::max(1.0 + g, 0.0);
  out.grad_in = 1.0 - g > 0.0 ? -1.0 : 0.0;
  out.grad_out = 1.0 + g > 0.0 ? 1.0 : 0.0;
  return out;
}

double msp_score(std::span<const double> logits) {
  const Vector p = softmax(logits);
  return *std::max_element(p.begin(), p.end());
}

}  // namespace woods
