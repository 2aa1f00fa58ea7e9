// include/woods/baselines.hpp

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

#ifndef WOODS_BASELINES_HPP_
#define WOODS_BASELINES_HPP_

#include <optional>
#include <utility>
#include <vector>

#include "woods/alm.hpp"
#include "woods/data.hpp"
#include "woods/nnet.hpp"

namespace woods {

enum class BaselineMethod { kCeOnly, kOe, kEnergyReg };

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kCeOnly;
  double lambda_reg = 0.0;
  // Free-energy margins, required for energy_reg: the regularizer penalizes
  // ID free energy above m_in and wild free energy below m_out.
  std::optional<double> m_in;
  std::optional<double> m_out;

  void validate() const;
};

// Regularized training on the same (ID, wild) data: per batch,
// mean CE over the ID batch + lambda * method regularizer. With lambda = 0
// every method follows the exact ce_only parameter trajectory (the ID batch
// stream is independent of the wild stream).
//
// oe: mean over the wild batch of logsumexp(logits) - mean(logits), the
//     cross-entropy of the softmax against uniform up to the constant ln K.
// energy_reg: mean over ID of max(0, F - m_in)^2 + mean over wild of
//     max(0, m_out - F)^2, with F = -logsumexp(logits).
std::pair<MlpModel, std::vector<EpochLog>> baseline_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>* wild_features, const BaselineConfig& config,
    const TrainConfig& train_config);

std::pair<MlpModel, std::vector<EpochLog>> ce_only_train(
    MlpModel model, const LabeledDataset& id_data, const TrainConfig& train_config);

std::pair<MlpModel, std::vector<EpochLog>> oe_train(MlpModel model,
                                                    const LabeledDataset& id_data,
                                                    const std::vector<Vector>& wild_features,
                                                    double lambda_reg,
                                                    const TrainConfig& train_config);

std::pair<MlpModel, std::vector<EpochLog>> energy_reg_train(
    MlpModel model, const LabeledDataset& id_data,
    const std::vector<Vector>& wild_features, double lambda_reg, double m_in,
    double m_out, const TrainConfig& train_config);

// Value and logit-gradient of the OE regularizer for one sample.
struct OeRegularizer {
  double value = 0.0;
  Vector grad_logits;
};
OeRegularizer oe_regularizer(std::span<const double> logits);

// Squared-hinge energy regularizer terms for one sample (F = -logsumexp).
struct EnergyRegTerm {
  double value = 0.0;
  Vector grad_logits;
};
EnergyRegTerm energy_reg_id_term(std::span<const double> logits, double m_in);
EnergyRegTerm energy_reg_wild_term(std::span<const double> logits, double m_out);

}  // namespace woods

#endif  // WOODS_BASELINES_HPP_
