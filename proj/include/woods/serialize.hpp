// include/woods/serialize.hpp

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

#ifndef WOODS_SERIALIZE_HPP_
#define WOODS_SERIALIZE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "woods/alm.hpp"
#include "woods/eval.hpp"
#include "woods/nnet.hpp"

namespace woods {

// Model file schema (format_version 1): layer dims, activation name, flat
// row-major weight and bias arrays per layer, energy_slope_w, optional head.
std::string model_to_json(const MlpModel& model);
MlpModel model_from_json(const std::string& text);
void save_model(const std::filesystem::path& path, const MlpModel& model);
MlpModel load_model(const std::filesystem::path& path);

std::string report_to_json(const DetectionReport& report, const std::string& scorer);

// EpochLog CSV: epoch,ood_constraint,cls_constraint,objective,lambda1,lambda2,beta1,beta2
void write_epoch_log_csv(const std::filesystem::path& path,
                         const std::vector<EpochLog>& logs);
std::vector<EpochLog> read_epoch_log_csv(const std::filesystem::path& path);

// Score dump for external plotting: score,origin rows with origin in {id, ood}.
void write_scores_csv(const std::filesystem::path& path, const ScoreSet& scores);

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace woods

#endif  // WOODS_SERIALIZE_HPP_
