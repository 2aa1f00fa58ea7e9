// src/capi.cpp

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

#include "woods.h"

#include <cstring>
#include <span>
#include <string>

#include "woods/config.hpp"
#include "woods/errors.hpp"
#include "woods/eval.hpp"
#include "woods/pipeline.hpp"
#include "woods/serialize.hpp"

// Opaque handle: just the C++ model by value.
struct woods_model {
  woods::MlpModel model;
};

namespace {

constexpr const char* kVersion = "1.0.0";

void set_error(char* err_buf, size_t err_cap, const char* msg) {
  if (!err_buf || err_cap == 0) return;
  std::strncpy(err_buf, msg, err_cap - 1);
  err_buf[err_cap - 1] = '\0';
}

// Runs fn, mapping the C++ error taxonomy onto status codes.
template <typename Fn>
woods_status guarded(char* err_buf, size_t err_cap, Fn&& fn) {
  try {
    fn();
    return WOODS_OK;
  } catch (const woods::ConfigError& e) {
    set_error(err_buf, err_cap, e.what());
    return WOODS_ERROR_CONFIG;
  } catch (const woods::DataError& e) {
    set_error(err_buf, err_cap, e.what());
    return WOODS_ERROR_DATA;
  } catch (const woods::NumericError& e) {
    set_error(err_buf, err_cap, e.what());
    return WOODS_ERROR_NUMERIC;
  } catch (const std::exception& e) {
    set_error(err_buf, err_cap, e.what());
    return WOODS_ERROR_CONFIG;
  }
}

std::string or_empty(const char* s) { return s ? std::string(s) : std::string(); }

}  // namespace

extern "C" {

const char* woods_version(void) { return kVersion; }

woods_status woods_run_generate(const char* config_path, const char* out_dir,
                                char* err_buf, size_t err_cap) {
  return guarded(err_buf, err_cap, [&] {
    if (!config_path) throw woods::ConfigError("generate: null config path");
    const woods::ExperimentConfig config = woods::load_config(config_path);
    woods::run_generate(config, woods::resolve_output_dir(config, or_empty(out_dir)));
  });
}

woods_status woods_run_train(const char* config_path, const char* data_dir,
                             const char* out_dir, char* err_buf, size_t err_cap) {
  return guarded(err_buf, err_cap, [&] {
    if (!config_path) throw woods::ConfigError("train: null config path");
    const woods::ExperimentConfig config = woods::load_config(config_path);
    woods::run_train(config, or_empty(data_dir),
                     woods::resolve_output_dir(config, or_empty(out_dir)));
  });
}

woods_status woods_run_evaluate(const char* model_path, const char* id_test_csv,
                                const char* ood_test_csv, const char* scorer,
                                const char* report_path, const char* scores_csv_path,
                                char* err_buf, size_t err_cap) {
  return guarded(err_buf, err_cap, [&] {
    if (!model_path || !id_test_csv || !ood_test_csv || !scorer || !report_path) {
      throw woods::ConfigError("evaluate: null argument");
    }
    woods::run_evaluate(model_path, id_test_csv, ood_test_csv, scorer, report_path,
                        or_empty(scores_csv_path));
  });
}

woods_status woods_run_sweep(const char* config_path, const double* pi_values,
                             size_t num_pi, const char* out_dir, char* err_buf,
                             size_t err_cap) {
  return guarded(err_buf, err_cap, [&] {
    if (!config_path) throw woods::ConfigError("sweep: null config path");
    if (num_pi > 0 && !pi_values) throw woods::ConfigError("sweep: null pi array");
    const woods::ExperimentConfig config = woods::load_config(config_path);
    const std::vector<double> pis(pi_values, pi_values + num_pi);
    woods::run_sweep(config, pis, woods::resolve_output_dir(config, or_empty(out_dir)));
  });
}

woods_status woods_model_open(const char* model_path, woods_model** out_model,
                              char* err_buf, size_t err_cap) {
  return guarded(err_buf, err_cap, [&] {
    if (!model_path || !out_model) throw woods::ConfigError("model_open: null argument");
    *out_model = new woods_model{woods::load_model(model_path)};
  });
}

void woods_model_close(woods_model* model) { delete model; }

size_t woods_model_input_dim(const woods_model* model) {
  return model ? model->model.input_dim() : 0;
}

size_t woods_model_num_classes(const woods_model* model) {
  return model ? model->model.num_classes() : 0;
}

int woods_model_has_head(const woods_model* model) {
  return model && model->model.ood_head ? 1 : 0;
}

woods_status woods_model_score(const woods_model* model, const double* features,
                               size_t dim, const char* scorer, double* out_score,
                               char* err_buf, size_t err_cap) {
  return guarded(err_buf, err_cap, [&] {
    if (!model || !features || !scorer || !out_score) {
      throw woods::ConfigError("model_score: null argument");
    }
    *out_score = woods::score_sample(model->model, std::span<const double>(features, dim),
                                     woods::scorer_from_name(scorer));
  });
}

woods_status woods_model_logits(const woods_model* model, const double* features,
                                size_t dim, double* out_logits, size_t logits_cap,
                                char* err_buf, size_t err_cap) {
  return guarded(err_buf, err_cap, [&] {
    if (!model || !features || !out_logits) {
      throw woods::ConfigError("model_logits: null argument");
    }
    if (logits_cap < model->model.num_classes()) {
      throw woods::ConfigError("model_logits: logits buffer too small");
    }
    const woods::Vector logits =
        woods::forward(model->model, std::span<const double>(features, dim));
    std::memcpy(out_logits, logits.data(), logits.size() * sizeof(double));
  });
}

}  // extern "C"
