// Copyright 2026 The hbpe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the hbpe library. All handles are opaque; every call that
 * can fail returns an hbpe_status and leaves a message for hbpe_last_error()
 * on the calling thread. Strings returned through char** are owned by the
 * caller and released with hbpe_string_free(). */

#ifndef HBPE_HBPE_H
#define HBPE_HBPE_H

#include <stddef.h>

#if defined(_WIN32)
#define HBPE_API __declspec(dllexport)
#else
#define HBPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values double as CLI exit codes. */
typedef enum hbpe_status {
  HBPE_OK = 0,
  HBPE_ERR_USAGE = 1,     /* bad argument, config or flag */
  HBPE_ERR_DATA = 2,      /* unreadable, malformed or inconsistent data */
  HBPE_ERR_NUMERICAL = 3, /* ill-conditioned kernel, divergence, non-finite values */
  HBPE_ERR_PARTIAL = 4    /* sweep finished but some units failed */
} hbpe_status;

typedef struct hbpe_dataset hbpe_dataset;
typedef struct hbpe_sweep hbpe_sweep;
typedef struct hbpe_solution hbpe_solution;

/* Called once per finished sweep record, never concurrently. */
typedef void (*hbpe_record_fn)(const char* record_json, void* user);

HBPE_API const char* hbpe_version(void);
/* Message of the last failed call on this thread; "" if none. */
HBPE_API const char* hbpe_last_error(void);
HBPE_API void hbpe_string_free(char* s);

/* spec_json overrides the synthetic defaults (NULL or "" for none). Person i
 * is generated with seed spec.seed + i. */
HBPE_API hbpe_status hbpe_dataset_generate(const char* spec_json, int persons,
                                           hbpe_dataset** out);
HBPE_API hbpe_status hbpe_dataset_load(const char* path, int classes, hbpe_dataset** out);
HBPE_API hbpe_status hbpe_dataset_save(const hbpe_dataset* dataset, const char* path);
HBPE_API void hbpe_dataset_free(hbpe_dataset* dataset);
HBPE_API int hbpe_dataset_size(const hbpe_dataset* dataset);
/* JSON array with id, length, classes, feature dims and label entropies. */
HBPE_API hbpe_status hbpe_dataset_summary(const hbpe_dataset* dataset, char** out_json);

/* Defaults overlaid with config_json, validated, as JSON. */
HBPE_API hbpe_status hbpe_config_resolve(const char* config_json, char** out_json);

/* Returns HBPE_ERR_PARTIAL with *out set when some units failed. */
HBPE_API hbpe_status hbpe_sweep_run(const hbpe_dataset* dataset, const char* config_json,
                                    hbpe_record_fn on_record, void* user, hbpe_sweep** out);
HBPE_API hbpe_status hbpe_sweep_load(const char* sweep_json_path, hbpe_sweep** out);
HBPE_API void hbpe_sweep_free(hbpe_sweep* sweep);
HBPE_API int hbpe_sweep_failed_units(const hbpe_sweep* sweep);
HBPE_API hbpe_status hbpe_sweep_write_csv(const hbpe_sweep* sweep, const char* path);
/* provenance_json is stored under "provenance" (NULL for none). */
HBPE_API hbpe_status hbpe_sweep_write_json(const hbpe_sweep* sweep, const char* path,
                                           const char* provenance_json);
/* Per-person table at one fraction: mean (std) per method and stream. */
HBPE_API hbpe_status hbpe_sweep_table(const hbpe_sweep* sweep, double fraction, char** out_text);
/* Plot-ready CSV: one row per (fraction, method, stream). */
HBPE_API hbpe_status hbpe_sweep_write_report(const hbpe_sweep* sweep, const char* path);

/* One masked run on person index `person`. request_json keys (all optional):
 * fraction, seed, method, weights, kernel, laplacian_weight, anchor_scope,
 * tol, max_iter, variance_keep, use_soft_labels, checkpoint_path,
 * checkpoint_every. Without "kernel" the kernel is chosen by marginal
 * likelihood over the default grid. */
HBPE_API hbpe_status hbpe_solve(const hbpe_dataset* dataset, int person, const char* request_json,
                                hbpe_solution** out);
HBPE_API void hbpe_solution_free(hbpe_solution* solution);
HBPE_API double hbpe_solution_accuracy(const hbpe_solution* solution, int stream);
/* Request echo, accuracies, solver report and masks as JSON. */
HBPE_API hbpe_status hbpe_solution_json(const hbpe_solution* solution, char** out_json);
/* CSV with t, predicted and true classes and observed flags per stream. */
HBPE_API hbpe_status hbpe_solution_write_predictions(const hbpe_solution* solution,
                                                     const char* path);

#ifdef __cplusplus
}
#endif

#endif /* HBPE_HBPE_H */
