// src/pipeline.cpp

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

#include "woods/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "woods/baselines.hpp"
#include "woods/errors.hpp"
#include "woods/rng.hpp"
#include "woods/serialize.hpp"

namespace woods {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct GeneratedData {
  LabeledDataset id_train, id_val, id_test;
  WildDataset wild;
  std::vector<Vector> ood_test;
};

GeneratedData generate_datasets(const ExperimentConfig& config) {
  const TaskConfig& task = config.task;
  if (task.kind == TaskKind::kCsv) {
    throw ConfigError("generate: csv tasks name existing files; nothing to generate");
  }
  const std::uint64_t data_seed = config.seeds.data;
  const std::size_t total_per_class =
      task.id_train_per_class + task.id_val_per_class + task.id_test_per_class;
  if (total_per_class == 0) throw ConfigError("generate: zero ID counts");

  GeneratedData out;
  LabeledDataset id_all;
  std::vector<Vector> ood_pool;
  LabeledDataset id_mix;

  if (task.kind == TaskKind::kGaussians) {
    const std::vector<std::size_t> pool_counts(task.id_components.size(),
                                               total_per_class);
    id_all = gen_gaussian_labeled(task.id_components, pool_counts,
                                  derive_seed(data_seed, 0));
    const std::vector<std::size_t> mix_counts(task.id_components.size(),
                                              task.id_mix_per_class);
    id_mix = gen_gaussian_labeled(task.id_components, mix_counts,
                                  derive_seed(data_seed, 2));
    ood_pool = gen_gaussian_samples(task.ood_component, task.ood_pool_count,
                                    derive_seed(data_seed, 3));
    const GaussianComponent& test_component =
        task.ood_test_component ? *task.ood_test_component : task.ood_component;
    out.ood_test = gen_gaussian_samples(test_component, task.ood_test_count,
                                        derive_seed(data_seed, 4));
  } else {
    MoonsRingSpec pool_spec{task.noise, total_per_class, task.ood_pool_count,
                            task.ring_radius};
    auto [moons_all, ring_pool] = gen_moons_ring_task(pool_spec, derive_seed(data_seed, 0));
    id_all = std::move(moons_all);
    ood_pool = std::move(ring_pool);
    MoonsRingSpec mix_spec{task.noise, task.id_mix_per_class, task.ood_test_count,
                           task.ring_radius};
    auto [moons_mix, ring_test] = gen_moons_ring_task(mix_spec, derive_seed(data_seed, 2));
    id_mix = std::move(moons_mix);
    out.ood_test = std::move(ring_test);
  }

  const double total = static_cast<double>(total_per_class);
  const std::vector<double> fractions = {
      static_cast<double>(task.id_train_per_class) / total,
      static_cast<double>(task.id_val_per_class) / total,
      static_cast<double>(task.id_test_per_class) / total};
  std::vector<LabeledDataset> parts = split(id_all, fractions, derive_seed(data_seed, 1));
  out.id_train = std::move(parts[0]);
  out.id_val = std::move(parts[1]);
  out.id_test = std::move(parts[2]);

  MixtureSpec mixture = config.mixture;
  mixture.seed = derive_seed(data_seed, 5);
  out.wild = make_wild(id_mix.features, ood_pool, mixture);
  return out;
}

LabeledDataset load_labeled(const fs::path& path, const std::string& label_column) {
  return load_labeled_csv(path, label_column).data;
}

struct TrainInputs {
  LabeledDataset id_train;
  std::vector<Vector> wild;
};

TrainInputs load_train_inputs(const ExperimentConfig& config, const fs::path& data_dir) {
  TrainInputs in;
  if (config.task.kind == TaskKind::kCsv) {
    in.id_train = load_labeled(config.task.id_train_path, config.task.label_column);
    in.wild = load_feature_csv(config.task.wild_path);
  } else {
    in.id_train = load_labeled(data_dir / files::kIdTrain, "label");
    in.wild = load_feature_csv(data_dir / files::kWild);
  }
  if (in.id_train.size() == 0) throw DataError("train: empty ID training set");
  if (in.wild.empty()) throw DataError("train: empty wild set");
  return in;
}

json epoch_log_tail_json(const std::vector<EpochLog>& logs) {
  json final = json::object();
  if (logs.empty()) return final;
  const EpochLog& last = logs.back();
  final["epoch"] = last.epoch;
  final["ood_constraint"] = last.ood_constraint;
  final["cls_constraint"] = last.cls_constraint;
  final["objective"] = last.objective;
  final["lambda1"] = last.lambda1;
  final["lambda2"] = last.lambda2;
  final["beta1"] = last.beta1;
  final["beta2"] = last.beta2;
  return final;
}

std::string csv_safe(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

}  // namespace

std::filesystem::path resolve_output_dir(const ExperimentConfig& config,
                                         const std::string& explicit_dir) {
  if (!explicit_dir.empty()) return explicit_dir;
  if (const char* env = std::getenv("WOODS_OUTPUT_DIR"); env && *env) return env;
  if (!config.output_dir.empty()) return config.output_dir;
  throw ConfigError("no output directory: pass one, set WOODS_OUTPUT_DIR, or set "
                    "'output_dir' in the config");
}

void run_generate(const ExperimentConfig& config, const fs::path& out_dir) {
  const GeneratedData data = generate_datasets(config);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create directory " + out_dir.string());
  write_labeled_csv(out_dir / files::kIdTrain, data.id_train);
  write_labeled_csv(out_dir / files::kIdVal, data.id_val);
  write_labeled_csv(out_dir / files::kIdTest, data.id_test);
  write_feature_csv(out_dir / files::kWild, data.wild.features());
  write_provenance_csv(out_dir / files::kWildProvenance, data.wild);
  write_feature_csv(out_dir / files::kOodTest, data.ood_test);
}

TrainOutputs run_train(const ExperimentConfig& config, const fs::path& data_dir,
                       const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  const TrainInputs inputs = load_train_inputs(config, data_dir);

  MlpInitOptions init_opts;
  init_opts.with_head = config.model.ood_head;
  init_opts.head_hidden_dim = config.model.head_hidden_dim;
  init_opts.energy_slope_w = config.model.energy_slope_w;
  MlpModel model = mlp_init(config.model.layer_dims, config.model.activation,
                            config.seeds.init, init_opts);
  if (model.input_dim() != inputs.id_train.dim) {
    throw ConfigError("train: model input dim " + std::to_string(model.input_dim()) +
                      " does not match data dim " + std::to_string(inputs.id_train.dim));
  }
  if (model.num_classes() != inputs.id_train.num_classes) {
    throw ConfigError("train: model output dim " + std::to_string(model.num_classes()) +
                      " does not match class count " +
                      std::to_string(inputs.id_train.num_classes));
  }

  const MethodConfig& method = config.method;
  TrainConfig train_cfg = config.training;
  train_cfg.seed = config.seeds.train;

  MlpModel trained;
  std::vector<EpochLog> logs;
  double tau = method.tau;
  if (method.kind == MethodKind::kWoods || method.kind == MethodKind::kWoodsNn) {
    TrainConfig warm_cfg = train_cfg;
    warm_cfg.epochs = method.warmup_epochs;
    warm_cfg.seed = derive_seed(config.seeds.train, 7);
    auto [warm_model, warm_logs] = ce_only_train(std::move(model), inputs.id_train, warm_cfg);
    if (!method.tau_fixed) {
      const OodLossKind kind = method.kind == MethodKind::kWoodsNn
                                   ? OodLossKind::kNnHead
                                   : OodLossKind::kEnergySigmoid;
      tau = 2.0 * full_constraint_values(warm_model, inputs.id_train, kind).cls;
    }
    ConstraintSpec spec{method.alpha, tau, method.tol};
    AlmState state;
    state.gamma = method.gamma;
    state.mu2 = method.mu2;
    if (method.kind == MethodKind::kWoods) {
      std::tie(trained, logs) = woods_train(std::move(warm_model), inputs.id_train,
                                            inputs.wild, spec, state, train_cfg);
    } else {
      std::tie(trained, logs) = woods_nn_head_train(std::move(warm_model), inputs.id_train,
                                                    inputs.wild, spec, state, train_cfg);
    }
  } else {
    BaselineConfig baseline;
    baseline.lambda_reg = method.lambda_reg;
    baseline.m_in = method.m_in;
    baseline.m_out = method.m_out;
    switch (method.kind) {
      case MethodKind::kCeOnly:
        baseline.method = BaselineMethod::kCeOnly;
        break;
      case MethodKind::kOe:
        baseline.method = BaselineMethod::kOe;
        break;
      default:
        baseline.method = BaselineMethod::kEnergyReg;
        break;
    }
    const std::vector<Vector>* wild =
        baseline.method == BaselineMethod::kCeOnly ? nullptr : &inputs.wild;
    std::tie(trained, logs) =
        baseline_train(std::move(model), inputs.id_train, wild, baseline, train_cfg);
    tau = 0.0;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create directory " + out_dir.string());
  TrainOutputs outputs;
  outputs.model_path = out_dir / files::kModel;
  outputs.epoch_log_path = out_dir / files::kEpochLog;
  outputs.summary_path = out_dir / files::kSummary;
  save_model(outputs.model_path, trained);
  write_epoch_log_csv(outputs.epoch_log_path, logs);

  const double wall_clock =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json summary;
  summary["schema_version"] = 1;
  summary["method"] = method_name(method.kind);
  summary["config"] = json::parse(config.canonical_json);
  summary["config_hash"] = config.config_hash;
  summary["tau"] = tau;
  summary["epochs_run"] = logs.size();
  summary["final"] = epoch_log_tail_json(logs);
  summary["wall_clock_seconds"] = wall_clock;
  write_text_file(outputs.summary_path, summary.dump(2) + "\n");
  return outputs;
}

DetectionReport run_evaluate(const fs::path& model_path, const fs::path& id_test_csv,
                             const fs::path& ood_test_csv, const std::string& scorer,
                             const fs::path& report_path,
                             const fs::path& scores_csv_path) {
  const Scorer kind = scorer_from_name(scorer);
  const MlpModel model = load_model(model_path);
  const LabeledDataset id_test = load_labeled(id_test_csv, "label");
  const std::vector<Vector> ood_test = load_feature_csv(ood_test_csv);
  if (id_test.size() == 0 || ood_test.empty()) {
    throw DataError("evaluate: empty test set");
  }
  const DetectionReport report = evaluate(model, id_test, ood_test, kind);
  if (!report_path.empty()) {
    write_text_file(report_path, report_to_json(report, scorer));
  }
  if (!scores_csv_path.empty()) {
    const ScoreSet scores = collect_scores(model, id_test.features, ood_test, kind);
    write_scores_csv(scores_csv_path, scores);
  }
  return report;
}

Scorer default_scorer(MethodKind method) {
  switch (method) {
    case MethodKind::kWoodsNn:
      return Scorer::kNnHead;
    case MethodKind::kOe:
      return Scorer::kMsp;
    default:
      return Scorer::kEnergySigmoid;
  }
}

void run_sweep(const ExperimentConfig& config, const std::vector<double>& pi_values,
               const fs::path& out_dir) {
  std::vector<double> pis = pi_values;
  if (pis.empty() && config.sweep) pis = config.sweep->pi_values;
  if (pis.empty()) throw ConfigError("sweep: no pi values given");
  for (double pi : pis) {
    if (!(pi > 0.0 && pi <= 1.0)) throw ConfigError("sweep: pi must be in (0, 1]");
  }
  std::vector<MethodKind> methods;
  if (config.sweep && !config.sweep->methods.empty()) {
    methods = config.sweep->methods;
  } else {
    methods = {config.method.kind};
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw DataError("cannot create directory " + out_dir.string());

  std::ofstream table(out_dir / files::kSweep);
  if (!table) throw DataError("cannot write sweep table");
  table << "pi,method,scorer,fpr_at_95tpr,auroc,accuracy,status\n";

  for (std::size_t i = 0; i < pis.size(); ++i) {
    const double pi = pis[i];
    ExperimentConfig cell_config = config;
    cell_config.mixture.pi = pi;
    cell_config.seeds.data = derive_seed(config.seeds.data, 100 + i);

    const fs::path pi_dir = out_dir / ("pi_" + format_double(pi));
    const fs::path data_dir = pi_dir / "data";
    bool data_ok = true;
    std::string data_error;
    try {
      run_generate(cell_config, data_dir);
    } catch (const Error& e) {
      data_ok = false;
      data_error = e.what();
    }

    for (MethodKind method : methods) {
      cell_config.method.kind = method;
      const Scorer scorer = default_scorer(method);
      table << format_double(pi) << ',' << method_name(method) << ','
            << scorer_name(scorer) << ',';
      if (!data_ok) {
        table << ",,," << csv_safe(data_error) << "\n";
        continue;
      }
      try {
        const fs::path run_dir = pi_dir / method_name(method);
        const TrainOutputs outputs = run_train(cell_config, data_dir, run_dir);
        const DetectionReport report = run_evaluate(
            outputs.model_path, data_dir / files::kIdTest, data_dir / files::kOodTest,
            scorer_name(scorer), run_dir / "report.json");
        table << format_double(report.fpr_at_95tpr) << ',' << format_double(report.auroc)
              << ',' << format_double(report.accuracy) << ",ok\n";
      } catch (const Error& e) {
        table << ",,," << csv_safe(e.what()) << "\n";
      }
      table.flush();
    }
  }
  if (!table) throw DataError("sweep table write failed");
}

}  // namespace woods
