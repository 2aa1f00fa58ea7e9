// src/config.cpp

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

#include "woods/config.hpp"

#include <set>

#include <json.hpp>

#include "woods/errors.hpp"
#include "woods/rng.hpp"
#include "woods/serialize.hpp"
#include "woods/sha1.hpp"

namespace woods {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) {
      throw ConfigError("config: unknown key '" + key + "' in " + context);
    }
  }
}

double get_number(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError("config: '" + key + "' must be a number");
  return obj[key].get<double>();
}

std::int64_t get_int(const json& obj, const std::string& key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError("config: '" + key + "' must be an integer");
  }
  return obj[key].get<std::int64_t>();
}

std::size_t get_count(const json& obj, const std::string& key, std::size_t fallback) {
  const std::int64_t v = get_int(obj, key, static_cast<std::int64_t>(fallback));
  if (v < 0) throw ConfigError("config: '" + key + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

bool get_bool(const json& obj, const std::string& key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_boolean()) throw ConfigError("config: '" + key + "' must be a boolean");
  return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& key,
                       const std::string& fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_string()) throw ConfigError("config: '" + key + "' must be a string");
  return obj[key].get<std::string>();
}

Vector get_vector(const json& j, const std::string& context) {
  if (!j.is_array()) throw ConfigError("config: " + context + " must be an array");
  Vector v;
  for (const json& x : j) {
    if (!x.is_number()) throw ConfigError("config: " + context + " must hold numbers");
    v.push_back(x.get<double>());
  }
  return v;
}

// A covariance entry may be a scalar (isotropic), a vector (diagonal), or a
// matrix (full, symmetric positive definite).
void parse_covariance(const json& j, std::size_t dim, GaussianComponent& comp,
                      const std::string& context) {
  if (j.is_number()) {
    comp.cov_diag.assign(dim, j.get<double>());
    return;
  }
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    Matrix cov(j.size(), j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
      const Vector row = get_vector(j[i], context);
      if (row.size() != j.size()) {
        throw ConfigError("config: " + context + " must be square");
      }
      for (std::size_t c = 0; c < row.size(); ++c) cov(i, c) = row[c];
    }
    comp.cov_full = std::move(cov);
    return;
  }
  comp.cov_diag = get_vector(j, context);
}

TaskConfig parse_task(const json& j) {
  if (!j.is_object()) throw ConfigError("config: 'task' must be an object");
  const std::string generator = get_string(j, "generator", "");
  if (generator.empty()) throw ConfigError("config: missing field 'task.generator'");

  TaskConfig task;
  const std::set<std::string> count_keys = {
      "id_train_per_class", "id_val_per_class", "id_test_per_class",
      "id_mix_per_class",   "ood_pool_count",   "ood_test_count"};
  auto read_counts = [&] {
    task.id_train_per_class = get_count(j, "id_train_per_class", task.id_train_per_class);
    task.id_val_per_class = get_count(j, "id_val_per_class", task.id_val_per_class);
    task.id_test_per_class = get_count(j, "id_test_per_class", task.id_test_per_class);
    task.id_mix_per_class = get_count(j, "id_mix_per_class", task.id_mix_per_class);
    task.ood_pool_count = get_count(j, "ood_pool_count", task.ood_pool_count);
    task.ood_test_count = get_count(j, "ood_test_count", task.ood_test_count);
  };

  if (generator == "gaussians") {
    task.kind = TaskKind::kGaussians;
    std::set<std::string> allowed = {"generator", "id_means", "id_covs", "ood_mean",
                                     "ood_cov",   "ood_test_mean", "ood_test_cov"};
    allowed.insert(count_keys.begin(), count_keys.end());
    check_keys(j, allowed, "task");
    if (!j.contains("id_means")) throw ConfigError("config: missing 'task.id_means'");
    const json& means = j["id_means"];
    if (!means.is_array() || means.size() < 2) {
      throw ConfigError("config: 'task.id_means' needs >= 2 class means");
    }
    for (std::size_t k = 0; k < means.size(); ++k) {
      GaussianComponent comp;
      comp.mean = get_vector(means[k], "task.id_means[" + std::to_string(k) + "]");
      task.id_components.push_back(std::move(comp));
    }
    const std::size_t dim = task.id_components.front().mean.size();
    if (j.contains("id_covs")) {
      const json& covs = j["id_covs"];
      if (!covs.is_array() || covs.size() != task.id_components.size()) {
        throw ConfigError("config: 'task.id_covs' must list one covariance per class");
      }
      for (std::size_t k = 0; k < task.id_components.size(); ++k) {
        parse_covariance(covs[k], dim, task.id_components[k],
                         "task.id_covs[" + std::to_string(k) + "]");
      }
    } else {
      for (GaussianComponent& comp : task.id_components) comp.cov_diag.assign(dim, 1.0);
    }
    if (!j.contains("ood_mean")) throw ConfigError("config: missing 'task.ood_mean'");
    task.ood_component.mean = get_vector(j["ood_mean"], "task.ood_mean");
    if (j.contains("ood_cov")) {
      parse_covariance(j["ood_cov"], dim, task.ood_component, "task.ood_cov");
    } else {
      task.ood_component.cov_diag.assign(dim, 1.0);
    }
    if (j.contains("ood_test_mean")) {
      GaussianComponent test;
      test.mean = get_vector(j["ood_test_mean"], "task.ood_test_mean");
      if (j.contains("ood_test_cov")) {
        parse_covariance(j["ood_test_cov"], dim, test, "task.ood_test_cov");
      } else {
        test.cov_diag.assign(dim, 1.0);
      }
      task.ood_test_component = std::move(test);
    } else if (j.contains("ood_test_cov")) {
      throw ConfigError("config: 'task.ood_test_cov' without 'task.ood_test_mean'");
    }
    read_counts();
  } else if (generator == "moons_ring") {
    task.kind = TaskKind::kMoonsRing;
    std::set<std::string> allowed = {"generator", "noise", "ring_radius"};
    allowed.insert(count_keys.begin(), count_keys.end());
    check_keys(j, allowed, "task");
    task.noise = get_number(j, "noise", task.noise);
    task.ring_radius = get_number(j, "ring_radius", task.ring_radius);
    if (task.ring_radius <= 0.0) {
      throw ConfigError("config: 'task.ring_radius' must be > 0");
    }
    read_counts();
  } else if (generator == "csv") {
    task.kind = TaskKind::kCsv;
    check_keys(j,
               {"generator", "id_train", "id_val", "id_test", "wild", "ood_test",
                "label_column"},
               "task");
    task.id_train_path = get_string(j, "id_train", "");
    task.id_val_path = get_string(j, "id_val", "");
    task.id_test_path = get_string(j, "id_test", "");
    task.wild_path = get_string(j, "wild", "");
    task.ood_test_path = get_string(j, "ood_test", "");
    task.label_column = get_string(j, "label_column", task.label_column);
    if (task.id_train_path.empty() || task.wild_path.empty()) {
      throw ConfigError("config: csv task requires 'id_train' and 'wild' paths");
    }
  } else {
    throw ConfigError("config: unknown generator '" + generator + "'");
  }
  return task;
}

MethodConfig parse_method(const json& j) {
  if (!j.is_object()) throw ConfigError("config: 'method' must be an object");
  check_keys(j,
             {"name", "alpha", "tol", "gamma", "mu2", "tau_mode", "tau",
              "warmup_epochs", "lambda_reg", "m_in", "m_out"},
             "method");
  MethodConfig method;
  const std::string name = get_string(j, "name", "");
  if (name.empty()) throw ConfigError("config: missing field 'method.name'");
  method.kind = method_from_name(name);
  method.alpha = get_number(j, "alpha", method.alpha);
  method.tol = get_number(j, "tol", method.tol);
  method.gamma = get_number(j, "gamma", method.gamma);
  method.mu2 = get_number(j, "mu2", method.mu2);
  const std::string tau_mode = get_string(j, "tau_mode", "warmup");
  if (tau_mode == "fixed") {
    method.tau_fixed = true;
  } else if (tau_mode == "warmup") {
    method.tau_fixed = false;
  } else {
    throw ConfigError("config: 'method.tau_mode' must be warmup or fixed");
  }
  method.tau = get_number(j, "tau", method.tau);
  method.warmup_epochs = static_cast<int>(get_int(j, "warmup_epochs", method.warmup_epochs));
  method.lambda_reg = get_number(j, "lambda_reg", method.lambda_reg);
  if (j.contains("m_in")) method.m_in = get_number(j, "m_in", 0.0);
  if (j.contains("m_out")) method.m_out = get_number(j, "m_out", 0.0);

  if (!(method.alpha > 0.0 && method.alpha < 1.0)) {
    throw ConfigError("config: 'method.alpha' must be in (0, 1)");
  }
  if (method.tol < 0.0) throw ConfigError("config: 'method.tol' must be >= 0");
  if (method.gamma <= 1.0) throw ConfigError("config: 'method.gamma' must be > 1");
  if (method.mu2 <= 0.0) throw ConfigError("config: 'method.mu2' must be > 0");
  if (method.warmup_epochs < 0) {
    throw ConfigError("config: 'method.warmup_epochs' must be >= 0");
  }
  if (method.lambda_reg < 0.0) throw ConfigError("config: 'method.lambda_reg' must be >= 0");
  if (method.tau_fixed && method.tau < 0.0) {
    throw ConfigError("config: 'method.tau' must be >= 0");
  }
  if (method.kind == MethodKind::kEnergyReg && (!method.m_in || !method.m_out)) {
    throw ConfigError("config: energy_reg requires 'method.m_in' and 'method.m_out'");
  }
  return method;
}

ModelConfig parse_model(const json& j) {
  if (!j.is_object()) throw ConfigError("config: 'model' must be an object");
  check_keys(j,
             {"layer_dims", "activation", "ood_head", "head_hidden_dim",
              "energy_slope_w"},
             "model");
  ModelConfig model;
  if (j.contains("layer_dims")) {
    model.layer_dims.clear();
    for (const json& d : j["layer_dims"]) {
      if (!d.is_number_integer() || d.get<std::int64_t>() <= 0) {
        throw ConfigError("config: 'model.layer_dims' must hold positive integers");
      }
      model.layer_dims.push_back(d.get<std::size_t>());
    }
    if (model.layer_dims.size() < 2) {
      throw ConfigError("config: 'model.layer_dims' needs >= 2 entries");
    }
  }
  model.activation = activation_from_name(get_string(j, "activation", "relu"));
  model.ood_head = get_bool(j, "ood_head", model.ood_head);
  model.head_hidden_dim = get_count(j, "head_hidden_dim", model.head_hidden_dim);
  model.energy_slope_w = get_number(j, "energy_slope_w", model.energy_slope_w);
  return model;
}

TrainConfig parse_training(const json& j) {
  if (!j.is_object()) throw ConfigError("config: 'training' must be an object");
  check_keys(j,
             {"epochs", "batch_size", "steps_per_epoch", "mu1", "momentum",
              "nesterov", "weight_decay", "lr_decay"},
             "training");
  TrainConfig train;
  train.epochs = static_cast<int>(get_int(j, "epochs", train.epochs));
  train.batch_size = static_cast<int>(get_int(j, "batch_size", train.batch_size));
  train.steps_per_epoch =
      static_cast<int>(get_int(j, "steps_per_epoch", train.steps_per_epoch));
  train.mu1 = get_number(j, "mu1", train.mu1);
  train.momentum = get_number(j, "momentum", train.momentum);
  train.nesterov = get_bool(j, "nesterov", train.nesterov);
  train.weight_decay = get_number(j, "weight_decay", train.weight_decay);
  train.lr_decay = get_bool(j, "lr_decay", train.lr_decay);
  train.validate();
  if (train.momentum < 0.0 || train.momentum >= 1.0) {
    throw ConfigError("config: 'training.momentum' must be in [0, 1)");
  }
  if (train.weight_decay < 0.0) {
    throw ConfigError("config: 'training.weight_decay' must be >= 0");
  }
  return train;
}

}  // namespace

MethodKind method_from_name(const std::string& name) {
  if (name == "woods") return MethodKind::kWoods;
  if (name == "woods_nn") return MethodKind::kWoodsNn;
  if (name == "ce_only") return MethodKind::kCeOnly;
  if (name == "oe") return MethodKind::kOe;
  if (name == "energy_reg") return MethodKind::kEnergyReg;
  throw ConfigError("config: unknown method '" + name + "'");
}

std::string method_name(MethodKind method) {
  switch (method) {
    case MethodKind::kWoods:
      return "woods";
    case MethodKind::kWoodsNn:
      return "woods_nn";
    case MethodKind::kCeOnly:
      return "ce_only";
    case MethodKind::kOe:
      return "oe";
    case MethodKind::kEnergyReg:
      return "energy_reg";
  }
  return "";
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  check_keys(j,
             {"task", "mixture", "model", "method", "training", "seeds", "output_dir",
              "sweep"},
             "top level");
  if (!j.contains("task")) throw ConfigError("config: missing 'task'");
  if (!j.contains("method")) throw ConfigError("config: missing 'method'");

  ExperimentConfig config;
  config.task = parse_task(j["task"]);
  config.method = parse_method(j["method"]);
  config.model = j.contains("model") ? parse_model(j["model"]) : ModelConfig{};
  config.training = j.contains("training") ? parse_training(j["training"]) : TrainConfig{};

  if (j.contains("mixture")) {
    const json& m = j["mixture"];
    if (!m.is_object()) throw ConfigError("config: 'mixture' must be an object");
    check_keys(m, {"pi", "m", "fixed_counts"}, "mixture");
    config.mixture.pi = get_number(m, "pi", config.mixture.pi);
    config.mixture.m = get_count(m, "m", config.mixture.m);
    config.mixture.fixed_counts = get_bool(m, "fixed_counts", false);
  }
  if (!(config.mixture.pi > 0.0 && config.mixture.pi <= 1.0)) {
    throw ConfigError("config: 'mixture.pi' must be in (0, 1]");
  }
  if (config.mixture.m == 0) throw ConfigError("config: 'mixture.m' must be > 0");

  if (j.contains("seeds")) {
    const json& s = j["seeds"];
    if (!s.is_object()) throw ConfigError("config: 'seeds' must be an object");
    check_keys(s, {"data", "init", "train"}, "seeds");
    config.seeds.data = static_cast<std::uint64_t>(get_int(s, "data", 1));
    config.seeds.init = static_cast<std::uint64_t>(get_int(s, "init", 2));
    config.seeds.train = static_cast<std::uint64_t>(get_int(s, "train", 3));
  }
  config.training.seed = config.seeds.train;
  config.mixture.seed = derive_seed(config.seeds.data, 5);

  config.output_dir = get_string(j, "output_dir", "");

  if (j.contains("sweep")) {
    const json& s = j["sweep"];
    if (!s.is_object()) throw ConfigError("config: 'sweep' must be an object");
    check_keys(s, {"pi_values", "methods"}, "sweep");
    SweepConfig sweep;
    if (s.contains("pi_values")) {
      for (const json& p : s["pi_values"]) {
        if (!p.is_number()) throw ConfigError("config: 'sweep.pi_values' must be numbers");
        const double pi = p.get<double>();
        if (!(pi > 0.0 && pi <= 1.0)) {
          throw ConfigError("config: sweep pi values must be in (0, 1]");
        }
        sweep.pi_values.push_back(pi);
      }
    }
    if (s.contains("methods")) {
      for (const json& m : s["methods"]) {
        if (!m.is_string()) throw ConfigError("config: 'sweep.methods' must be strings");
        sweep.methods.push_back(method_from_name(m.get<std::string>()));
      }
    }
    if (sweep.methods.empty()) sweep.methods.push_back(config.method.kind);
    config.sweep = std::move(sweep);
  }

  // Model head consistency with the method.
  if (config.method.kind == MethodKind::kWoodsNn && !config.model.ood_head) {
    throw ConfigError("config: method woods_nn requires 'model.ood_head' = true");
  }

  config.canonical_json = j.dump(2) + "\n";
  config.config_hash = sha1_hex(config.canonical_json);
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const DataError& e) {
    // A missing config file is a configuration problem, not a data problem.
    throw ConfigError(e.what());
  }
  return parse_config_text(text);
}

}  // namespace woods
