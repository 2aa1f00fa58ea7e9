// include/woods/eval.hpp

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

#ifndef WOODS_EVAL_HPP_
#define WOODS_EVAL_HPP_

#include <span>
#include <string>
#include <vector>

#include "woods/data.hpp"
#include "woods/nnet.hpp"
#include "woods/numeric.hpp"

namespace woods {

// Scores are oriented higher = more ID, everywhere.
struct ScoreSet {
  Vector id_scores;
  Vector ood_scores;
};

struct DetectionReport {
  double fpr_at_95tpr = 0.0;
  double auroc = 0.0;
  double accuracy = 0.0;
  double threshold = 0.0;
  std::size_t n_id = 0;
  std::size_t n_ood = 0;
};

enum class Scorer { kEnergySigmoid, kNnHead, kMsp };

Scorer scorer_from_name(const std::string& name);
std::string scorer_name(Scorer scorer);

// sigmoid(w * energy): a monotone transform of w * E, in (0, 1).
double score_energy(const MlpModel& model, std::span<const double> x);
double score_sample(const MlpModel& model, std::span<const double> x, Scorer scorer);

struct FprResult {
  double fpr = 0.0;
  double threshold = 0.0;
};

// FPR at the largest threshold t that still declares at least tpr_target of
// the ID scores as ID (score >= t counts as ID; ties stay on the "in" side).
FprResult fpr_at_tpr(const ScoreSet& scores, double tpr_target = 0.95);

// Mann-Whitney U probability that a random ID score exceeds a random OOD
// score, ties counted half. Computed by rank sums but contractually equal to
// the pairwise definition.
double auroc(const ScoreSet& scores);

// Fraction with argmax logit equal to the label; argmax ties broken toward
// the lowest class index.
double accuracy(const MlpModel& model, const LabeledDataset& dataset);

struct ThresholdChoice {
  double threshold = 0.0;
  double wild_in_rate = 0.0;
};

// Holdout threshold selection: over all thresholds (distinct scores and
// +/-inf), minimize the fraction of wild scores declared ID subject to the
// fraction of ID scores declared OOD being at most alpha + epsilon. Ties
// break toward the larger threshold. Always feasible: t = -inf declares
// everything ID.
ThresholdChoice validate_threshold(std::span<const double> holdout_id_scores,
                                   std::span<const double> holdout_wild_scores,
                                   double alpha, double epsilon);

DetectionReport evaluate(const MlpModel& model, const LabeledDataset& id_test,
                         const std::vector<Vector>& ood_test, Scorer scorer);

ScoreSet collect_scores(const MlpModel& model, const std::vector<Vector>& id_features,
                        const std::vector<Vector>& ood_features, Scorer scorer);

}  // namespace woods

#endif  // WOODS_EVAL_HPP_
