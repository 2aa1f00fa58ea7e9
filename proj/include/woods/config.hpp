// include/woods/config.hpp

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

#ifndef WOODS_CONFIG_HPP_
#define WOODS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "woods/alm.hpp"
#include "woods/data.hpp"

namespace woods {

enum class MethodKind { kWoods, kWoodsNn, kCeOnly, kOe, kEnergyReg };

MethodKind method_from_name(const std::string& name);
std::string method_name(MethodKind method);

enum class TaskKind { kGaussians, kMoonsRing, kCsv };

struct TaskConfig {
  TaskKind kind = TaskKind::kGaussians;
  // gaussians
  std::vector<GaussianComponent> id_components;
  GaussianComponent ood_component;
  std::optional<GaussianComponent> ood_test_component;  // defaults to ood_component
  // moons_ring
  double noise = 0.1;
  double ring_radius = 3.0;
  // synthetic counts
  std::size_t id_train_per_class = 1000;
  std::size_t id_val_per_class = 200;
  std::size_t id_test_per_class = 500;
  std::size_t id_mix_per_class = 1000;
  std::size_t ood_pool_count = 2000;
  std::size_t ood_test_count = 1000;
  // csv paths
  std::string id_train_path, id_val_path, id_test_path, wild_path, ood_test_path;
  std::string label_column = "label";
};

struct MethodConfig {
  MethodKind kind = MethodKind::kWoods;
  double alpha = 0.05;
  double tol = 0.05;
  double gamma = 1.5;
  double mu2 = 1.0;
  bool tau_fixed = false;  // false: tau = 2 x warm-up CE ("warmup" mode)
  double tau = 1.0;        // used when tau_fixed
  int warmup_epochs = 20;
  double lambda_reg = 0.5;
  std::optional<double> m_in;
  std::optional<double> m_out;
};

struct ModelConfig {
  std::vector<std::size_t> layer_dims = {2, 16, 16, 2};
  Activation activation = Activation::kRelu;
  bool ood_head = false;
  std::size_t head_hidden_dim = 300;
  double energy_slope_w = -1.0;
};

struct SeedConfig {
  std::uint64_t data = 1;
  std::uint64_t init = 2;
  std::uint64_t train = 3;
};

struct SweepConfig {
  std::vector<double> pi_values;
  std::vector<MethodKind> methods;
};

struct ExperimentConfig {
  TaskConfig task;
  MixtureSpec mixture{0.1, 2000, 0, false};
  ModelConfig model;
  MethodConfig method;
  TrainConfig training;
  SeedConfig seeds;
  std::string output_dir;
  std::optional<SweepConfig> sweep;
  std::string canonical_json;  // sorted-key echo of the validated input
  std::string config_hash;     // sha1 of canonical_json
};

// Parses and validates a config file. Unknown keys anywhere are rejected.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

}  // namespace woods

#endif  // WOODS_CONFIG_HPP_
