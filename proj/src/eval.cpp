// src/eval.cpp

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

#include "woods/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "woods/errors.hpp"
#include "woods/losses.hpp"

namespace woods {

Scorer scorer_from_name(const std::string& name) {
  if (name == "energy_sigmoid") return Scorer::kEnergySigmoid;
  if (name == "nn_head") return Scorer::kNnHead;
  if (name == "msp") return Scorer::kMsp;
  throw ConfigError("unknown scorer '" + name +
                    "' (expected energy_sigmoid, nn_head, or msp)");
}

std::string scorer_name(Scorer scorer) {
  switch (scorer) {
    case Scorer::kEnergySigmoid:
      return "energy_sigmoid";
    case Scorer::kNnHead:
      return "nn_head";
    case Scorer::kMsp:
      return "msp";
  }
  return "";
}

double score_energy(const MlpModel& model, std::span<const double> x) {
  const Vector logits = forward(model, x);
  return sigmoid(model.energy_slope_w * energy_score(logits));
}

double score_sample(const MlpModel& model, std::span<const double> x, Scorer scorer) {
  switch (scorer) {
    case Scorer::kEnergySigmoid:
      return score_energy(model, x);
    case Scorer::kNnHead: {
      if (!model.ood_head) {
        throw ConfigError("nn_head scorer requires a model with a head");
      }
      ForwardTrace trace;
      forward(model, x, &trace);
      // The head is trained so positive g means OOD; flip and squash so
      // higher = more ID like every other scorer.
      return sigmoid(-head_forward(model, trace));
    }
    case Scorer::kMsp: {
      const Vector logits = forward(model, x);
      return msp_score(logits);
    }
  }
  throw ConfigError("score_sample: bad scorer");
}

FprResult fpr_at_tpr(const ScoreSet& scores, double tpr_target) {
  if (scores.id_scores.empty()) throw ConfigError("fpr_at_tpr: empty ID scores");
  if (scores.ood_scores.empty()) throw ConfigError("fpr_at_tpr: empty OOD scores");
  if (!(tpr_target > 0.0 && tpr_target <= 1.0)) {
    throw ConfigError("fpr_at_tpr: tpr_target must be in (0, 1]");
  }
  // The largest feasible threshold is always one of the ID scores: on any
  // interval between consecutive ID values the count of id >= t is constant
  // and the interval is closed on the right at an ID value.
  Vector id_sorted = scores.id_scores;
  std::sort(id_sorted.begin(), id_sorted.end());
  const double n_id = static_cast<double>(id_sorted.size());
  double threshold = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = id_sorted.size(); i-- > 0;) {
    // id_sorted[i] is a candidate t; ids >= t are those at positions >= the
    // first occurrence of t.
    const std::size_t first =
        std::lower_bound(id_sorted.begin(), id_sorted.end(), id_sorted[i]) -
        id_sorted.begin();
    const double tpr = static_cast<double>(id_sorted.size() - first) / n_id;
    if (tpr >= tpr_target) {
      threshold = id_sorted[i];
      break;
    }
  }
  std::size_t false_positives = 0;
  for (double s : scores.ood_scores) false_positives += s >= threshold ? 1 : 0;
  return {static_cast<double>(false_positives) /
              static_cast<double>(scores.ood_scores.size()),
          threshold};
}

double auroc(const ScoreSet& scores) {
  if (scores.id_scores.empty() || scores.ood_scores.empty()) {
    throw ConfigError("auroc: empty score set");
  }
  struct Tagged {
    double score;
    bool is_id;
  };
  std::vector<Tagged> all;
  all.reserve(scores.id_scores.size() + scores.ood_scores.size());
  for (double s : scores.id_scores) all.push_back({s, true});
  for (double s : scores.ood_scores) all.push_back({s, false});
  std::sort(all.begin(), all.end(),
            [](const Tagged& a, const Tagged& b) { return a.score < b.score; });

  // Midranks handle ties exactly as the pairwise half-count does.
  double rank_sum_id = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].score == all[i].score) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].is_id) rank_sum_id += midrank;
    }
    i = j;
  }
  const double n1 = static_cast<double>(scores.id_scores.size());
  const double n0 = static_cast<double>(scores.ood_scores.size());
  const double u = rank_sum_id - n1 * (n1 + 1.0) / 2.0;
  return u / (n1 * n0);
}

double accuracy(const MlpModel& model, const LabeledDataset& dataset) {
  if (dataset.size() == 0) throw ConfigError("accuracy: empty dataset");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const Vector logits = forward(model, dataset.features[i]);
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.size(); ++j) {
      if (logits[j] > logits[best]) best = j;  // ties keep the lowest index
    }
    correct += best == dataset.labels[i] ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

ThresholdChoice validate_threshold(std::span<const double> holdout_id_scores,
                                   std::span<const double> holdout_wild_scores,
                                   double alpha, double epsilon) {
  if (holdout_id_scores.empty() || holdout_wild_scores.empty()) {
    throw ConfigError("validate_threshold: empty score set");
  }
  if (epsilon < 0.0) throw ConfigError("validate_threshold: negative epsilon");

  Vector candidates(holdout_id_scores.begin(), holdout_id_scores.end());
  candidates.insert(candidates.end(), holdout_wild_scores.begin(),
                    holdout_wild_scores.end());
  candidates.push_back(-std::numeric_limits<double>::infinity());
  candidates.push_back(std::numeric_limits<double>::infinity());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const double n_id = static_cast<double>(holdout_id_scores.size());
  const double n_wild = static_cast<double>(holdout_wild_scores.size());
  ThresholdChoice best{-std::numeric_limits<double>::infinity(), 1.0};
  bool found = false;
  for (double t : candidates) {
    std::size_t id_out = 0;
    for (double s : holdout_id_scores) id_out += s < t ? 1 : 0;
    const double id_out_rate = static_cast<double>(id_out) / n_id;
    if (id_out_rate > alpha + epsilon) continue;
    std::size_t wild_in = 0;
    for (double s : holdout_wild_scores) wild_in += s >= t ? 1 : 0;
    const double wild_in_rate = static_cast<double>(wild_in) / n_wild;
    // Strictly better, or equal with a larger threshold.
    if (!found || wild_in_rate < best.wild_in_rate ||
        (wild_in_rate == best.wild_in_rate && t > best.threshold)) {
      best = {t, wild_in_rate};
      found = true;
    }
  }
  return best;
}

ScoreSet collect_scores(const MlpModel& model, const std::vector<Vector>& id_features,
                        const std::vector<Vector>& ood_features, Scorer scorer) {
  ScoreSet scores;
  scores.id_scores.reserve(id_features.size());
  for (const Vector& x : id_features) {
    scores.id_scores.push_back(score_sample(model, x, scorer));
  }
  scores.ood_scores.reserve(ood_features.size());
  for (const Vector& x : ood_features) {
    scores.ood_scores.push_back(score_sample(model, x, scorer));
  }
  return scores;
}

DetectionReport evaluate(const MlpModel& model, const LabeledDataset& id_test,
                         const std::vector<Vector>& ood_test, Scorer scorer) {
  if (id_test.size() == 0 || ood_test.empty()) {
    throw ConfigError("evaluate: empty test set");
  }
  const ScoreSet scores = collect_scores(model, id_test.features, ood_test, scorer);
  const FprResult fpr = fpr_at_tpr(scores, 0.95);
  DetectionReport report;
  report.fpr_at_95tpr = fpr.fpr;
  report.threshold = fpr.threshold;
  report.auroc = auroc(scores);
  report.accuracy = accuracy(model, id_test);
  report.n_id = scores.id_scores.size();
  report.n_ood = scores.ood_scores.size();
  return report;
}

}  // namespace woods
