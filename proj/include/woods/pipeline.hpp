// include/woods/pipeline.hpp

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

#ifndef WOODS_PIPELINE_HPP_
#define WOODS_PIPELINE_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "woods/config.hpp"
#include "woods/eval.hpp"

namespace woods {

// Fixed artifact names inside a data/run directory.
namespace files {
inline constexpr const char* kIdTrain = "id_train.csv";
inline constexpr const char* kIdVal = "id_val.csv";
inline constexpr const char* kIdTest = "id_test.csv";
inline constexpr const char* kWild = "wild.csv";
inline constexpr const char* kWildProvenance = "wild_provenance.csv";
inline constexpr const char* kOodTest = "ood_test.csv";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kEpochLog = "epoch_log.csv";
inline constexpr const char* kSummary = "summary.json";
inline constexpr const char* kSweep = "sweep.csv";
}  // namespace files

// Precedence: explicit dir > WOODS_OUTPUT_DIR env > config.output_dir.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::string& explicit_dir);

// Writes ID train/val/test CSVs, the wild CSV with its provenance side-file,
// and the OOD test CSV. Byte-identical across re-runs with the same config.
void run_generate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct TrainOutputs {
  std::filesystem::path model_path;
  std::filesystem::path epoch_log_path;
  std::filesystem::path summary_path;
};

// Trains per the configured method, reading datasets from data_dir (or from
// the csv paths in the config for csv tasks). Model file and epoch log are
// deterministic functions of the config + input files.
TrainOutputs run_train(const ExperimentConfig& config,
                       const std::filesystem::path& data_dir,
                       const std::filesystem::path& out_dir);

// Loads a model and test CSVs, writes a DetectionReport JSON (and optionally
// a score dump CSV).
DetectionReport run_evaluate(const std::filesystem::path& model_path,
                             const std::filesystem::path& id_test_csv,
                             const std::filesystem::path& ood_test_csv,
                             const std::string& scorer,
                             const std::filesystem::path& report_path,
                             const std::filesystem::path& scores_csv_path = {});

// generate+train+evaluate per (pi, method) cell with per-pi derived data
// seeds; one CSV row per cell. A failing cell records its error in-row and
// the sweep continues.
void run_sweep(const ExperimentConfig& config, const std::vector<double>& pi_values,
               const std::filesystem::path& out_dir);

// The scorer each method is evaluated with in sweeps.
Scorer default_scorer(MethodKind method);

}  // namespace woods

#endif  // WOODS_PIPELINE_HPP_
