// Copyright 2026 The arterial-risk Authors.
// SPDX-License-Identifier: Apache-2.0

// C interface to the arterial-risk library.
//
// Every fallible call returns an ar_status; on failure ar_last_error()
// returns the message for the calling thread until its next failing call.
// Handles are opaque and owned by the caller; release them with the matching
// *_free function. Strings returned through char** are released with
// ar_string_free.

#ifndef ARTERIAL_RISK_H_
#define ARTERIAL_RISK_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AR_API __declspec(dllexport)
#else
#define AR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ar_status {
  AR_OK = 0,
  AR_ERR_INVALID_ARGUMENT = 1,
  AR_ERR_IO = 2,
  AR_ERR_MISSING_COLUMN = 3,
  AR_ERR_BAD_ROW = 4,
  AR_ERR_DANGLING_REFERENCE = 5,
  AR_ERR_UNKNOWN_SEGMENT = 6,
  AR_ERR_INSUFFICIENT_COVERAGE = 7,
  AR_ERR_NO_WEATHER_COVERAGE = 8,
  AR_ERR_NO_VIABLE_STRATA = 9,
  AR_ERR_UNKNOWN_FEATURE = 10,
  AR_ERR_DIMENSION_MISMATCH = 11,
  AR_ERR_UNKNOWN_GROUPING = 12,
  AR_ERR_NON_POSITIVE_TAU = 13,
  AR_ERR_SEPARATION = 14,
  AR_ERR_NO_CONVERGENCE = 15,
  AR_ERR_NON_FINITE_TARGET = 16,
  AR_ERR_ZERO_ACCEPTANCE = 17,
  AR_ERR_TOO_FEW_DRAWS = 18,
  AR_ERR_SINGLE_CHAIN = 19,
  AR_ERR_EMPTY_SCORES = 20,
  AR_ERR_SINGLE_CLASS = 21,
  AR_ERR_INVALID_CONFIG = 22,
  AR_ERR_INTERNAL = 99
} ar_status;

typedef enum ar_model {
  AR_MODEL_CONDITIONAL = 0,
  AR_MODEL_LOGISTIC = 1,
  AR_MODEL_RANEF = 2
} ar_model;

typedef enum ar_grouping {
  AR_GROUPING_STRATUM = 0,
  AR_GROUPING_SEGMENT = 1
} ar_grouping;

typedef enum ar_format { AR_FORMAT_CSV = 0, AR_FORMAT_MARKDOWN = 1 } ar_format;

typedef struct ar_corpus ar_corpus;
typedef struct ar_dataset ar_dataset;
typedef struct ar_fit ar_fit;

AR_API const char* ar_version(void);
AR_API const char* ar_last_error(void);
AR_API const char* ar_status_name(ar_status status);
AR_API void ar_string_free(char* s);

/* ---- corpus ------------------------------------------------------------ */

typedef struct ar_source_counts {
  size_t crashes;
  size_t travel_times;
  size_t volumes;
  size_t phases;
  size_t weather;
  size_t segments;
} ar_source_counts;

/* Loads crashes.csv, bluetooth.csv, volumes.csv, phases.csv, weather.csv and
   segments.csv from `dir`. */
AR_API ar_status ar_corpus_load(const char* dir, ar_corpus** out);
AR_API ar_status ar_corpus_counts(const ar_corpus* corpus,
                                  ar_source_counts* out);
/* ISO-8601 bounds of the corpus time range, [start, end). */
AR_API ar_status ar_corpus_range(const ar_corpus* corpus, char** start,
                                 char** end);
AR_API void ar_corpus_free(ar_corpus* corpus);

/* ---- matched datasets -------------------------------------------------- */

typedef struct ar_dataset_info {
  size_t n_strata;
  size_t m;
  size_t k;
  size_t n_observations;
  size_t dropped_crashes;
  uint64_t seed;
} ar_dataset_info;

/* `features` is a comma-separated list; NULL or "" selects the default
   avg_speed_s2,up_vol_s2,rainy. */
AR_API ar_status ar_dataset_build(const ar_corpus* corpus, size_t m,
                                  const char* features, uint64_t seed,
                                  ar_dataset** out);
/* Reads the CSV and its .manifest sidecar. */
AR_API ar_status ar_dataset_load(const char* csv_path, ar_dataset** out);
AR_API ar_status ar_dataset_save(const ar_dataset* ds, const char* csv_path);
AR_API ar_status ar_dataset_info_get(const ar_dataset* ds,
                                     ar_dataset_info* out);
/* Comma-separated feature names. */
AR_API ar_status ar_dataset_features(const ar_dataset* ds, char** out);
AR_API void ar_dataset_free(ar_dataset* ds);

/* ---- fitting ----------------------------------------------------------- */

typedef struct ar_mcmc_config {
  int chains;
  int iterations; /* including burn-in */
  int burn_in;
  int thin;
  double initial_step;
  uint64_t seed;
  int parallel; /* nonzero: one thread per chain; results do not change */
} ar_mcmc_config;

AR_API void ar_mcmc_config_default(ar_mcmc_config* out);

typedef struct ar_fit_metrics {
  double dic;
  double d_bar;
  double d_hat;
  double p_d;
  double auc;
  double max_rhat;
  size_t n_params;
  size_t n_warnings;
} ar_fit_metrics;

typedef struct ar_param_summary {
  const char* name; /* valid while the fit handle lives */
  double mean;
  double sd;
  double q025;
  double q05;
  double q95;
  double q975;
  double hazard_ratio;
  double rhat;
  int sig_05;
  int sig_10;
} ar_param_summary;

AR_API ar_status ar_fit_run(const ar_dataset* ds, ar_model model,
                            ar_grouping grouping, const ar_mcmc_config* mcmc,
                            ar_fit** out);
AR_API ar_status ar_fit_metrics_get(const ar_fit* fit, ar_fit_metrics* out);
AR_API ar_status ar_fit_param(const ar_fit* fit, size_t index,
                              ar_param_summary* out);
AR_API ar_status ar_fit_warning(const ar_fit* fit, size_t index,
                                const char** out);
AR_API ar_status ar_fit_render(const ar_fit* fit, ar_format format,
                               char** out);
AR_API ar_status ar_fit_write_summary(const ar_fit* fit, ar_format format,
                                      const char* path);
AR_API ar_status ar_fit_write_coefficients(const ar_fit* fit,
                                           const char* path);
AR_API ar_status ar_fit_write_draws(const ar_fit* fit, const char* path);
AR_API ar_status ar_fit_write_roc(const ar_fit* fit, const char* path);
AR_API void ar_fit_free(ar_fit* fit);

/* Side-by-side report of several fits, one column group per model. */
AR_API ar_status ar_compare_render(const ar_fit* const* fits, size_t n,
                                   ar_format format, char** out);

/* Applies a coefficient file to a dataset; writes normalized scores and the
   ROC curve (either path may be NULL) and returns the AUC. */
AR_API ar_status ar_score(const char* coefficients_path, const ar_dataset* ds,
                          const char* scores_path, const char* roc_path,
                          double* auc);

/* ---- simulation -------------------------------------------------------- */

typedef enum ar_sim_mode { AR_SIM_MATCHED = 0, AR_SIM_CORPUS = 1 } ar_sim_mode;

typedef struct ar_sim_config {
  ar_sim_mode mode;
  uint64_t seed;
  const char* features;  /* comma list; NULL for the default */
  const char* true_beta; /* comma list matching features; NULL for default */
  size_t n_strata;       /* matched */
  size_t m;              /* matched */
  size_t n_segments;     /* corpus */
  size_t weeks;          /* corpus */
  double crash_intercept;
  double detection_rate;
  int with_phases;
} ar_sim_config;

AR_API void ar_sim_config_default(ar_sim_config* out);
/* Writes dataset.csv + dataset.manifest (matched) or the six corpus CSVs
   (corpus), plus truth.txt, into `out_dir`. */
AR_API ar_status ar_simulate(const ar_sim_config* config, const char* out_dir);

/* ---- control-ratio sweep ---------------------------------------------- */

typedef struct ar_sweep_row {
  size_t m;
  size_t n_strata;
  size_t dropped_crashes;
  double auc;
  double dic;
  double p_d;
} ar_sweep_row;

/* Builds and fits a conditional model for every m in [m_from, m_to]. `rows`
   may be NULL; otherwise it must hold m_to - m_from + 1 entries. `report`
   may be NULL. */
AR_API ar_status ar_ratio_sweep(const ar_corpus* corpus, size_t m_from,
                                size_t m_to, const char* features,
                                const ar_mcmc_config* mcmc, uint64_t seed,
                                ar_format format, ar_sweep_row* rows,
                                char** report);

#ifdef __cplusplus
}
#endif

#endif  // ARTERIAL_RISK_H_
