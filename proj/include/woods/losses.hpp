// include/woods/losses.hpp

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

#ifndef WOODS_LOSSES_HPP_
#define WOODS_LOSSES_HPP_

#include <cstddef>
#include <span>

#include "woods/numeric.hpp"

namespace woods {

// Stability policy for this whole module: every exp is taken of a shifted or
// sign-bounded argument, never of a raw unbounded input.

Vector softmax(std::span<const double> logits);

struct CrossEntropyLoss {
  double value = 0.0;
  Vector grad_logits;  // softmax - onehot(label)
};
CrossEntropyLoss cross_entropy(std::span<const double> logits, std::size_t label);

// log-sum-exp of the logits; the negated value is the free energy.
double energy_score(std::span<const double> logits);

struct EnergyScore {
  double value = 0.0;
  Vector grad_logits;  // softmax
};
EnergyScore energy_score_with_grad(std::span<const double> logits);

double sigmoid(double z);

// Binary detection losses on a scalar score s (the energy E or the head
// score g) with slope w. grad_score and grad_w are exact partials.
struct ScalarOodLoss {
  double value = 0.0;
  double grad_score = 0.0;
  double grad_w = 0.0;
};

// Loss of labeling a sample "in": sigmoid(w * s).
ScalarOodLoss ood_loss_in(double score, double w);
// Loss of labeling a sample "out": sigmoid(-w * s).
ScalarOodLoss ood_loss_out(double score, double w);

// Hinge losses for the detection-head variant. The subgradient exactly at
// the kink is 0 so optimizer behavior is deterministic.
struct HingePair {
  double loss_in = 0.0;   // max(1 - g, 0): wild sample not scored as outlier
  double loss_out = 0.0;  // max(1 + g, 0): ID sample scored as outlier
  double grad_in = 0.0;   // d loss_in / dg
  double grad_out = 0.0;  // d loss_out / dg
};
HingePair hinge_head_losses(double g);

// Maximum softmax probability; higher = more ID.
double msp_score(std::span<const double> logits);

}  // namespace woods

#endif  // WOODS_LOSSES_HPP_
