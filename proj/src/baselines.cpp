// src/baselines.cpp

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

#include "woods/baselines.hpp"

#include <cmath>
#include <string>

#include "woods/errors.hpp"
#include "woods/losses.hpp"
#include "woods/rng.hpp"

namespace woods {

void BaselineConfig::validate() const {
  if (lambda_reg < 0.0) throw ConfigError("baseline: lambda_reg must be >= 0");
  if (method == BaselineMethod::kEnergyReg && (!m_in || !m_out)) {
    throw ConfigError("baseline: energy_reg requires both margins m_in and m_out");
  }
}

OeRegularizer oe_regularizer(std::span<const double> logits) {
  OeRegularizer out;
  const double lse = energy_score(logits);
  const double mean = pairwise_sum(logits) / static_cast<double>(logits.size());
  out.value = lse - mean;
  const Vector p = softmax(logits);
  out.grad_logits.resize(logits.size());
  const double inv_k = 1.0 / static_cast<double>(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) out.grad_logits[j] = p[j] - inv_k;
  return out;
}

EnergyRegTerm energy_reg_id_term(std::span<const double> logits, double m_in) {
  EnergyRegTerm out;
  const EnergyScore energy = energy_score_with_grad(logits);
  const double free_energy = -energy.value;
  const double gap = std::max(0.0, free_energy - m_in);
  out.value = gap * gap;
  out.grad_logits.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out.grad_logits[j] = 2.0 * gap * -energy.grad_logits[j];
  }
  return out;
}

EnergyRegTerm energy_reg_wild_term(std::span<const double> logits, double m_out) {
  EnergyRegTerm out;
  const EnergyScore energy = energy_score_with_grad(logits);
  const double free_energy = -energy.value;
  const double gap = std::max(0.0, m_out - free_energy);
  out.value = gap * gap;
  out.grad_logits.resize(logits.size());
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out.grad_logits[j] = 2.0 * gap * energy.grad_logits[j];
  }
  return out;
}

std::pair<MlpModel, std::vector<EpochLog>> baseline_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>* wild_features, const BaselineConfig& config,
    const TrainConfig& train_config) {
  config.validate();
  train_config.validate();
  if (id_data.size() == 0) throw ConfigError("baseline training: empty ID dataset");
  const bool uses_wild =
      config.method != BaselineMethod::kCeOnly && config.lambda_reg > 0.0;
  if (uses_wild && (!wild_features || wild_features->empty())) {
    throw ConfigError("baseline training: wild data required when lambda_reg > 0");
  }

  std::vector<EpochLog> logs;
  if (train_config.epochs == 0) return {std::move(model), std::move(logs)};

  OptimizerState opt =
      optimizer_init(model, train_config.mu1, train_config.momentum,
                     train_config.weight_decay, train_config.nesterov);
  Rng id_rng(train_config.seed);
  Rng wild_rng(derive_seed(train_config.seed, 1));
  const int steps = train_config.resolve_steps(id_data.size());
  const std::size_t batch = static_cast<std::size_t>(train_config.batch_size);
  const double inv_batch = 1.0 / static_cast<double>(batch);
  const double lambda = config.lambda_reg;

  std::vector<std::size_t> id_idx(batch);
  std::vector<std::size_t> wild_idx(batch);
  ForwardTrace trace;
  for (int epoch = 1; epoch <= train_config.epochs; ++epoch) {
    if (train_config.lr_decay) {
      int halvings = 0;
      for (double frac : {0.5, 0.75, 0.9}) {
        if (static_cast<double>(epoch - 1) >= frac * train_config.epochs) ++halvings;
      }
      opt.learning_rate = train_config.mu1 * std::pow(0.5, halvings);
    }
    for (int step = 0; step < steps; ++step) {
      for (std::size_t& i : id_idx) i = id_rng.index(id_data.size());
      Gradients grads = zero_gradients(model);
      double loss = 0.0;
      for (std::size_t i : id_idx) {
        const Vector logits = forward(model, id_data.features[i], &trace);
        const CrossEntropyLoss ce = cross_entropy(logits, id_data.labels[i]);
        loss += inv_batch * ce.value;
        Vector d_logits(logits.size());
        for (std::size_t j = 0; j < logits.size(); ++j) {
          d_logits[j] = inv_batch * ce.grad_logits[j];
        }
        if (config.method == BaselineMethod::kEnergyReg && lambda > 0.0) {
          const EnergyRegTerm reg = energy_reg_id_term(logits, *config.m_in);
          loss += lambda * inv_batch * reg.value;
          for (std::size_t j = 0; j < logits.size(); ++j) {
            d_logits[j] += lambda * inv_batch * reg.grad_logits[j];
          }
        }
        backward_accumulate(model, trace, d_logits, 0.0, 1.0, grads);
      }
      if (uses_wild) {
        for (std::size_t& i : wild_idx) i = wild_rng.index(wild_features->size());
        for (std::size_t i : wild_idx) {
          const Vector logits = forward(model, (*wild_features)[i], &trace);
          Vector d_logits(logits.size(), 0.0);
          if (config.method == BaselineMethod::kOe) {
            const OeRegularizer reg = oe_regularizer(logits);
            loss += lambda * inv_batch * reg.value;
            for (std::size_t j = 0; j < logits.size(); ++j) {
              d_logits[j] = lambda * inv_batch * reg.grad_logits[j];
            }
          } else {
            const EnergyRegTerm reg = energy_reg_wild_term(logits, *config.m_out);
            loss += lambda * inv_batch * reg.value;
            for (std::size_t j = 0; j < logits.size(); ++j) {
              d_logits[j] = lambda * inv_batch * reg.grad_logits[j];
            }
          }
          backward_accumulate(model, trace, d_logits, 0.0, 1.0, grads);
        }
      }
      if (!std::isfinite(loss)) {
        throw NumericError("baseline training: non-finite loss at epoch " +
                           std::to_string(epoch) + " batch " + std::to_string(step + 1));
      }
      sgd_step(model, grads, opt);
    }
    const ConstraintValues values =
        full_constraint_values(model, id_data, OodLossKind::kEnergySigmoid);
    const double objective =
        wild_features && !wild_features->empty()
            ? full_objective(model, *wild_features, OodLossKind::kEnergySigmoid)
            : 0.0;
    // lambda/beta columns are zero for baselines.
    logs.push_back({epoch, values.ood, values.cls, objective, 0.0, 0.0, 0.0, 0.0});
  }
  return {std::move(model), std::move(logs)};
}

std::pair<MlpModel, std::vector<EpochLog>> ce_only_train(
    MlpModel model, const LabeledDataset& id_data, const TrainConfig& train_config) {
  BaselineConfig config;
  config.method = BaselineMethod::kCeOnly;
  return baseline_train(std::move(model), id_data, nullptr, config, train_config);
}

std::pair<MlpModel, std::vector<EpochLog>> oe_train(MlpModel model,
                                                    const LabeledDataset& id_data,
                                                    const std::vector<Vector>& wild_features,
                                                    double lambda_reg,
                                                    const TrainConfig& train_config) {
  BaselineConfig config;
  config.method = BaselineMethod::kOe;
  config.lambda_reg = lambda_reg;
  return baseline_train(std::move(model), id_data, &wild_features, config, train_config);
}

std::pair<MlpModel, std::vector<EpochLog>> energy_reg_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>& wild_features, double lambda_reg, double m_in,
    double m_out, const TrainConfig& train_config) {
  BaselineConfig config;
  config.method = BaselineMethod::kEnergyReg;
  config.lambda_reg = lambda_reg;
  config.m_in = m_in;
  config.m_out = m_out;
  return baseline_train(std::move(model), id_data, &wild_features, config, train_config);
}

}  // namespace woods
