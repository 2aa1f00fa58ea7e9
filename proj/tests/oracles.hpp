// tests/oracles.hpp

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

// Straight-line reimplementations used as independent oracles. These stay
// deliberately naive (no shift tricks, no rank sums, no shared helpers from
// the library) so they check the production code by a different route.

#ifndef WOODS_TESTS_ORACLES_HPP_
#define WOODS_TESTS_ORACLES_HPP_

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "woods/alm.hpp"
#include "woods/data.hpp"
#include "woods/nnet.hpp"

namespace oracles {

using woods::Vector;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline double logsumexp(const Vector& logits) {
  double s = 0.0;
  for (double z : logits) s += std::exp(z);
  return std::log(s);
}

inline double cross_entropy(const Vector& logits, std::size_t y) {
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z);
  return -std::log(std::exp(logits[y]) / denom);
}

inline Vector softmax(const Vector& logits) {
  double denom = 0.0;
  for (double z : logits) denom += std::exp(z);
  Vector p;
  for (double z : logits) p.push_back(std::exp(z) / denom);
  return p;
}

inline double psi(double u, double v, double beta) {
  if (beta * u + v >= 0.0) return u * v + beta / 2.0 * u * u;
  return -v * v / (2.0 * beta);
}

// Plain-loop MLP evaluation, written without the library's forward().
inline Vector mlp_eval(const woods::MlpModel& model, const Vector& x) {
  Vector a = x;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const woods::Matrix& w = model.layers[l].weight;
    Vector z(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      z[i] = model.layers[l].bias[i];
      for (std::size_t j = 0; j < w.cols(); ++j) z[i] += w(i, j) * a[j];
    }
    if (l + 1 < model.layers.size()) {
      for (double& v : z) {
        v = model.activation == woods::Activation::kRelu ? (v > 0.0 ? v : 0.0)
                                                         : std::tanh(v);
      }
    }
    a = z;
  }
  return a;
}

inline double head_eval(const woods::MlpModel& model, const Vector& x) {
  Vector a = x;
  for (std::size_t l = 0; l + 1 < model.layers.size(); ++l) {
    const woods::Matrix& w = model.layers[l].weight;
    Vector z(w.rows(), 0.0);
    for (std::size_t i = 0; i < w.rows(); ++i) {
      z[i] = model.layers[l].bias[i];
      for (std::size_t j = 0; j < w.cols(); ++j) z[i] += w(i, j) * a[j];
      z[i] = model.activation == woods::Activation::kRelu ? (z[i] > 0.0 ? z[i] : 0.0)
                                                          : std::tanh(z[i]);
    }
    a = z;
  }
  const woods::OodHead& head = *model.ood_head;
  double g = head.output_bias;
  for (std::size_t i = 0; i < head.hidden_weight.rows(); ++i) {
    double h = head.hidden_bias[i];
    for (std::size_t j = 0; j < head.hidden_weight.cols(); ++j) {
      h += head.hidden_weight(i, j) * a[j];
    }
    g += head.output_weight[i] * (h > 0.0 ? h : 0.0);
  }
  return g;
}

// Straight-line per-batch constrained loss (sigmoid-energy form).
inline double batch_lagrangian(const woods::MlpModel& model,
                               const woods::LabeledDataset& id_data,
                               const std::vector<std::size_t>& id_idx,
                               const std::vector<Vector>& wild,
                               const std::vector<std::size_t>& wild_idx, double alpha,
                               double tau, double lambda1, double lambda2, double beta1,
                               double beta2) {
  const double w = model.energy_slope_w;
  double obj = 0.0;
  for (std::size_t i : wild_idx) {
    obj += sigmoid(w * logsumexp(mlp_eval(model, wild[i])));
  }
  obj /= static_cast<double>(wild_idx.size());
  double out_mean = 0.0;
  double ce_mean = 0.0;
  for (std::size_t i : id_idx) {
    const Vector logits = mlp_eval(model, id_data.features[i]);
    out_mean += sigmoid(-w * logsumexp(logits));
    ce_mean += cross_entropy(logits, id_data.labels[i]);
  }
  out_mean /= static_cast<double>(id_idx.size());
  ce_mean /= static_cast<double>(id_idx.size());
  return obj + psi(out_mean - alpha, lambda1, beta1) + psi(ce_mean - tau, lambda2, beta2);
}

// Central finite differences of an arbitrary scalar function of the model,
// over every parameter.
template <typename LossFn>
woods::Gradients fd_gradients(const woods::MlpModel& model, LossFn loss_fn,
                              double step = 1e-5) {
  woods::MlpModel copy = model;
  woods::Gradients grads = woods::zero_gradients(model);
  auto params = woods::param_slots(copy);
  auto grad_slots = woods::param_slots(grads);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = *params[i].value;
    *params[i].value = saved + step;
    const double up = loss_fn(copy);
    *params[i].value = saved - step;
    const double down = loss_fn(copy);
    *params[i].value = saved;
    *grad_slots[i].value = (up - down) / (2.0 * step);
  }
  return grads;
}

inline double max_rel_err(const woods::Gradients& a, const woods::Gradients& b,
                          double floor = 1e-4) {
  woods::Gradients ca = a;
  woods::Gradients cb = b;
  auto sa = woods::param_slots(ca);
  auto sb = woods::param_slots(cb);
  double worst = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double va = *sa[i].value;
    const double vb = *sb[i].value;
    const double rel =
        std::abs(va - vb) / std::max({std::abs(va), std::abs(vb), floor});
    worst = std::max(worst, rel);
  }
  return worst;
}

// O(n^2) pairwise AUROC.
inline double auroc_pairwise(const Vector& id_scores, const Vector& ood_scores) {
  double wins = 0.0;
  for (double i : id_scores) {
    for (double o : ood_scores) {
      if (i > o) {
        wins += 1.0;
      } else if (i == o) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(id_scores.size()) *
                 static_cast<double>(ood_scores.size()));
}

// Exhaustive threshold scan for FPR at TPR: try every ID score as the
// threshold, keep the largest feasible one.
struct FprScan {
  double fpr = 0.0;
  double threshold = 0.0;
};
inline FprScan fpr_scan(const Vector& id_scores, const Vector& ood_scores,
                        double tpr_target) {
  FprScan best;
  best.threshold = -std::numeric_limits<double>::infinity();
  bool found = false;
  for (double t : id_scores) {
    std::size_t in_count = 0;
    for (double s : id_scores) in_count += s >= t ? 1 : 0;
    const double tpr =
        static_cast<double>(in_count) / static_cast<double>(id_scores.size());
    if (tpr >= tpr_target && (!found || t > best.threshold)) {
      best.threshold = t;
      found = true;
    }
  }
  std::size_t fp = 0;
  for (double s : ood_scores) fp += s >= best.threshold ? 1 : 0;
  best.fpr = static_cast<double>(fp) / static_cast<double>(ood_scores.size());
  return best;
}

// Exhaustive scan matching the holdout threshold-selection contract.
struct ThresholdScan {
  double threshold = 0.0;
  double wild_in_rate = 0.0;
};
inline ThresholdScan threshold_scan(const Vector& id_scores, const Vector& wild_scores,
                                    double alpha, double epsilon) {
  Vector candidates = id_scores;
  candidates.insert(candidates.end(), wild_scores.begin(), wild_scores.end());
  candidates.push_back(-std::numeric_limits<double>::infinity());
  candidates.push_back(std::numeric_limits<double>::infinity());
  ThresholdScan best;
  bool found = false;
  for (double t : candidates) {
    std::size_t id_out = 0;
    for (double s : id_scores) id_out += s < t ? 1 : 0;
    if (static_cast<double>(id_out) / static_cast<double>(id_scores.size()) >
        alpha + epsilon) {
      continue;
    }
    std::size_t wild_in = 0;
    for (double s : wild_scores) wild_in += s >= t ? 1 : 0;
    const double rate =
        static_cast<double>(wild_in) / static_cast<double>(wild_scores.size());
    if (!found || rate < best.wild_in_rate ||
        (rate == best.wild_in_rate && t > best.threshold)) {
      best = {t, rate};
      found = true;
    }
  }
  return best;
}

}  // namespace oracles

#endif  // WOODS_TESTS_ORACLES_HPP_
