/* include/woods.h
 *
 * Copyright 2026 woods contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *  http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 * C API for the woods shared library: config-driven dataset generation,
 * constrained OOD-detector training, evaluation, and pi-sweeps, plus an
 * opaque model handle for scoring individual samples.
 *
 * Every fallible call returns a woods_status and, on failure, writes a
 * NUL-terminated message into err_buf (when err_buf is non-NULL and
 * err_cap > 0). Status values double as process exit codes.
 */

#ifndef WOODS_H_
#define WOODS_H_

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum woods_status {
  WOODS_OK = 0,
  WOODS_ERROR_CONFIG = 2,  /* invalid config, shapes, or API misuse */
  WOODS_ERROR_DATA = 3,    /* unreadable or malformed input files */
  WOODS_ERROR_NUMERIC = 4  /* non-finite loss or divergence */
} woods_status;

/* Opaque trained-model handle. */
typedef struct woods_model woods_model;

const char* woods_version(void);

/* Dataset generation per the config's task section. out_dir may be NULL or
 * empty to fall back to WOODS_OUTPUT_DIR and then the config's output_dir. */
woods_status woods_run_generate(const char* config_path, const char* out_dir,
                                char* err_buf, size_t err_cap);

/* Trains per the config's method section, reading dataset CSVs from
 * data_dir; writes model.json, epoch_log.csv, and summary.json to out_dir. */
woods_status woods_run_train(const char* config_path, const char* data_dir,
                             const char* out_dir, char* err_buf, size_t err_cap);

/* Scores a model file against ID/OOD test CSVs and writes a detection report
 * JSON. scorer is one of "energy_sigmoid", "nn_head", "msp". scores_csv_path
 * may be NULL to skip the per-sample score dump. */
woods_status woods_run_evaluate(const char* model_path, const char* id_test_csv,
                                const char* ood_test_csv, const char* scorer,
                                const char* report_path, const char* scores_csv_path,
                                char* err_buf, size_t err_cap);

/* generate+train+evaluate per (pi, method) cell; writes sweep.csv to out_dir.
 * pi_values may be NULL with num_pi 0 to use the config's sweep section. */
woods_status woods_run_sweep(const char* config_path, const double* pi_values,
                             size_t num_pi, const char* out_dir, char* err_buf,
                             size_t err_cap);

/* --- model handle ------------------------------------------------------- */

woods_status woods_model_open(const char* model_path, woods_model** out_model,
                              char* err_buf, size_t err_cap);
void woods_model_close(woods_model* model);

size_t woods_model_input_dim(const woods_model* model);
size_t woods_model_num_classes(const woods_model* model);
/* 1 when the model carries a detection head. */
int woods_model_has_head(const woods_model* model);

/* Detection score for one sample, oriented higher = more ID. */
woods_status woods_model_score(const woods_model* model, const double* features,
                               size_t dim, const char* scorer, double* out_score,
                               char* err_buf, size_t err_cap);

/* Raw classifier logits; logits_cap must be >= the class count. */
woods_status woods_model_logits(const woods_model* model, const double* features,
                                size_t dim, double* out_logits, size_t logits_cap,
                                char* err_buf, size_t err_cap);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* WOODS_H_ */
