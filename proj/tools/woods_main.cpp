// tools/woods_main.cpp

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

// Experiment runner over the woods C API. Exit codes: 0 ok, 2 config error,
// 3 data error, 4 numeric abort.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "woods.h"

namespace {

int report(woods_status status, const char* err_buf) {
  if (status != WOODS_OK) std::fprintf(stderr, "error: %s\n", err_buf);
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("woods ") + woods_version() +
               " - constrained OOD-detection training on wild mixture data"};
  app.require_subcommand(1);

  std::string config_path, data_dir, out_dir;
  std::string model_path, id_test_csv, ood_test_csv, scorer = "energy_sigmoid";
  std::string report_path = "report.json", scores_csv;
  std::vector<double> pi_values;

  CLI::App* generate = app.add_subcommand("generate", "Write dataset CSVs for a task");
  generate->add_option("-c,--config", config_path, "experiment config JSON")->required();
  generate->add_option("-o,--out", out_dir, "output directory");

  CLI::App* train = app.add_subcommand("train", "Train a model per the config method");
  train->add_option("-c,--config", config_path, "experiment config JSON")->required();
  train->add_option("-d,--data", data_dir, "directory holding the dataset CSVs");
  train->add_option("-o,--out", out_dir, "output directory");

  CLI::App* evaluate = app.add_subcommand("evaluate", "Score a trained model");
  evaluate->add_option("-m,--model", model_path, "model JSON file")->required();
  evaluate->add_option("--id-test", id_test_csv, "ID test CSV")->required();
  evaluate->add_option("--ood-test", ood_test_csv, "OOD test CSV")->required();
  evaluate->add_option("-s,--scorer", scorer, "energy_sigmoid | nn_head | msp");
  evaluate->add_option("-r,--report", report_path, "report JSON output path");
  evaluate->add_option("--scores-out", scores_csv, "optional per-sample score CSV");

  CLI::App* sweep = app.add_subcommand("sweep", "generate+train+evaluate per pi value");
  sweep->add_option("-c,--config", config_path, "experiment config JSON")->required();
  sweep->add_option("-o,--out", out_dir, "output directory");
  sweep->add_option("--pi", pi_values, "pi values (overrides the config sweep list)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(WOODS_ERROR_CONFIG);
  }

  char err[1024] = {0};
  if (generate->parsed()) {
    return report(woods_run_generate(config_path.c_str(),
                                     out_dir.empty() ? nullptr : out_dir.c_str(), err,
                                     sizeof(err)),
                  err);
  }
  if (train->parsed()) {
    return report(woods_run_train(config_path.c_str(), data_dir.c_str(),
                                  out_dir.empty() ? nullptr : out_dir.c_str(), err,
                                  sizeof(err)),
                  err);
  }
  if (evaluate->parsed()) {
    const woods_status status = woods_run_evaluate(
        model_path.c_str(), id_test_csv.c_str(), ood_test_csv.c_str(), scorer.c_str(),
        report_path.c_str(), scores_csv.empty() ? nullptr : scores_csv.c_str(), err,
        sizeof(err));
    if (status == WOODS_OK) std::printf("wrote %s\n", report_path.c_str());
    return report(status, err);
  }
  if (sweep->parsed()) {
    return report(woods_run_sweep(config_path.c_str(),
                                  pi_values.empty() ? nullptr : pi_values.data(),
                                  pi_values.size(),
                                  out_dir.empty() ? nullptr : out_dir.c_str(), err,
                                  sizeof(err)),
                  err);
  }
  return static_cast<int>(WOODS_ERROR_CONFIG);
}
