/* Copyright 2026 the spc-toolkit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* spc: robust S-chart toolkit.
 *
 * C interface to the spc core library. All functions return spc_status;
 * SPC_OK means success, anything else is an error and spc_last_error()
 * holds a human-readable message for the calling thread. Objects handed
 * out as opaque pointers are owned by the caller and released with the
 * matching *_destroy function.
 */

#ifndef SPC_SPC_H
#define SPC_SPC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SPC_API __declspec(dllexport)
#else
#define SPC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spc_status {
  SPC_OK = 0,
  SPC_ERR_INVALID_ARGUMENT = 1, /* bad parameter or domain error */
  SPC_ERR_DATA = 2,             /* malformed input data (CSV, dimensions) */
  SPC_ERR_CALIBRATION = 3,      /* calibration failed or cache conflict */
  SPC_ERR_IO = 4,               /* file system failure */
  SPC_ERR_INTERNAL = 5
} spc_status;

/* Scale estimator kinds. SPC_SCALE_QN is the median of all pairwise
 * absolute differences; SPC_SCALE_QN_RC is the order-statistic form
 * (k-th smallest pairwise difference, k = C(h,2), h = n/2 + 1). */
typedef enum spc_scale_kind {
  SPC_SCALE_SD = 0,
  SPC_SCALE_MAD = 1,
  SPC_SCALE_QN = 2,
  SPC_SCALE_QN_RC = 3,
  SPC_SCALE_MSLOG = 4
} spc_scale_kind;

typedef enum spc_location_kind {
  SPC_LOC_MEAN = 0,
  SPC_LOC_HUBER = 1,
  SPC_LOC_HD = 2, /* Harrell-Davis median */
  SPC_LOC_HL = 3  /* Hodges-Lehmann */
} spc_location_kind;

/* Phase I contamination models. `a` is a standard-deviation multiplier
 * for M1/M3 and an (integer) chi-square degrees-of-freedom for M2. The
 * contamination fraction is fixed at 0.20. */
typedef enum spc_model_kind {
  SPC_MODEL_CLEAN = 0,
  SPC_MODEL_M1 = 1, /* diffuse symmetric: N(0, a^2) observations */
  SPC_MODEL_M2 = 2, /* diffuse asymmetric: chi-square_a observations */
  SPC_MODEL_M3 = 3  /* localized: whole subgroups from N(0, a^2) */
} spc_model_kind;

typedef enum spc_study_kind { SPC_STUDY_MSE = 0, SPC_STUDY_ARL = 1 } spc_study_kind;

typedef struct spc_context spc_context;
typedef struct spc_chart spc_chart;
typedef struct spc_table spc_table;
typedef struct spc_subgroups spc_subgroups;

SPC_API const char* spc_version(void);

/* Message for the last error raised on the calling thread. */
SPC_API const char* spc_last_error(void);

/* A context owns the calibration cache and the worker-thread budget.
 * cache_dir: NULL resolves to $SPC_CACHE_DIR, falling back to ./.spc-cache.
 * threads: 0 means hardware concurrency. */
SPC_API spc_status spc_context_create(const char* cache_dir, int threads, spc_context** out);
SPC_API void spc_context_destroy(spc_context* ctx);

/* ---- special functions -------------------------------------------- */

SPC_API spc_status spc_reg_inc_beta(double x, double a, double b, double* out);
SPC_API spc_status spc_chi2_cdf(double x, int df, double* out);
SPC_API spc_status spc_chi2_quantile(double p, int df, double* out);
SPC_API spc_status spc_normal_cdf(double z, double* out);
SPC_API spc_status spc_normal_quantile(double p, double* out);

/* ---- estimators ---------------------------------------------------- */

/* Raw (uncorrected) scale estimate of one sample; n >= 2. */
SPC_API spc_status spc_scale_raw(spc_scale_kind kind, const double* xs, size_t n, double* out);

/* Finite-sample unbiasing factor for `kind` at sample size n, resolved
 * through the context's calibration cache. replicates <= 0 selects the
 * default (1e6). */
SPC_API spc_status spc_correction_factor(spc_context* ctx, spc_scale_kind kind, int n,
                                         int64_t replicates, double* out);

/* Corrected scale estimate: correction_factor(kind, n) * raw. */
SPC_API spc_status spc_scale_estimate(spc_context* ctx, spc_scale_kind kind, const double* xs,
                                      size_t n, double* out);

/* Location estimate of a list of values (Huber uses a corrected-MAD
 * auxiliary scale resolved through the context). */
SPC_API spc_status spc_location_estimate(spc_context* ctx, spc_location_kind kind,
                                         const double* xs, size_t n, double* out);

/* Calibrated two-sided tail mass for one estimator combination at the
 * given dimensions: the alpha whose equal-tailed limits give an
 * unconditional in-control ARL of target_arl0 (<= 0 for 370.4) over
 * clean Phase I data. Resolved through the calibration cache.
 * calibration_replicates <= 0 selects the default (20000). */
SPC_API spc_status spc_calibrate_alpha(spc_context* ctx, spc_scale_kind scale,
                                       spc_location_kind location, int n, int k,
                                       double target_arl0, int64_t calibration_replicates,
                                       double* out);

/* ---- charts --------------------------------------------------------- */

typedef struct spc_chart_summary {
  double center;   /* Phase I sigma-hat */
  double lcl, ucl; /* control limits, lcl = l_factor * center */
  double l_factor, u_factor;
  double alpha_star; /* calibrated two-sided tail mass */
  double target_arl0;
  int n, k;
} spc_chart_summary;

/* Build a chart from Phase I data (k rows of n observations, row major).
 * Control limits use the per-combination alpha calibrated so that the
 * unconditional in-control ARL equals target_arl0 (pass <= 0 for 370.4).
 * calibration_replicates <= 0 selects the default (20000). */
SPC_API spc_status spc_chart_build(spc_context* ctx, const double* phase1, int k, int n,
                                   spc_scale_kind scale, spc_location_kind location,
                                   double target_arl0, int64_t calibration_replicates,
                                   spc_chart** out);
SPC_API spc_status spc_chart_get_summary(const spc_chart* chart, spc_chart_summary* out);

/* Evaluate one Phase II subgroup: its sample standard deviation and
 * whether it signals (falls outside the limits). */
SPC_API spc_status spc_chart_eval(const spc_chart* chart, const double* subgroup, int n,
                                  double* stat_out, int* signal_out);

/* Exact per-subgroup signal probability when the process scale is
 * phi * sigma_true. */
SPC_API spc_status spc_chart_signal_probability(const spc_chart* chart, double sigma_true,
                                                double phi, double* out);

/* Write the limits and constants (machine-readable header + CSV), or
 * apply the chart to a Phase II subgroup CSV producing per-row stats and
 * signal flags. config_echo may be NULL or newline-separated "key = value"
 * lines echoed into the output headers. */
SPC_API spc_status spc_chart_write_limits_csv(const spc_chart* chart, const char* path,
                                              const char* config_echo);
SPC_API spc_status spc_chart_apply_csv(const spc_chart* chart, const char* phase2_csv,
                                       const char* out_csv, const char* config_echo);
SPC_API void spc_chart_destroy(spc_chart* chart);

/* ---- subgroup CSV input -------------------------------------------- */

/* Read a subgroup CSV: mandatory header row, then k rows of n numeric
 * fields; '#' lines are ignored. */
SPC_API spc_status spc_subgroups_read_csv(const char* path, spc_subgroups** out);
SPC_API spc_status spc_subgroups_dims(const spc_subgroups* sg, int* k, int* n);
SPC_API spc_status spc_subgroups_data(const spc_subgroups* sg, const double** rowmajor);
SPC_API void spc_subgroups_destroy(spc_subgroups* sg);

/* ---- Monte Carlo studies -------------------------------------------- */

typedef struct spc_study_cell {
  spc_model_kind model;
  double a;
} spc_study_cell;

typedef struct spc_study_options {
  spc_study_kind kind;
  int n, k;                       /* <= 0 selects defaults (5, 50) */
  int64_t replicates;             /* <= 0: 50000 for MSE, 10000 for ARL */
  int64_t calibration_replicates; /* <= 0: 20000 */
  double target_arl0;             /* <= 0: 370.4 */
  uint64_t seed;
  const spc_study_cell* cells; /* NULL: default model/severity grid */
  size_t n_cells;
  const spc_scale_kind* scales; /* NULL: sd, mad, qn, mslog */
  size_t n_scales;
  const spc_location_kind* locations; /* NULL: mean, huber, hd, hl */
  size_t n_locations;
  const double* phis; /* NULL: {1.0, 1.4}; ignored for MSE */
  size_t n_phis;
  const char* config_echo; /* optional header lines */
} spc_study_options;

/* Run a study over (cell x scale x location [x phi]) and return the
 * result table. Deterministic for a given seed at any thread count. */
SPC_API spc_status spc_study_run(spc_context* ctx, const spc_study_options* options,
                                 spc_table** out);

typedef struct spc_study_row {
  const char* model;
  double a;
  const char* scale;
  const char* location;
  double phi; /* NaN for MSE rows */
  double value;
  double std_error;
  int64_t excluded;
} spc_study_row;

SPC_API spc_status spc_table_num_rows(const spc_table* table, size_t* out);
SPC_API spc_status spc_table_row(const spc_table* table, size_t index, spc_study_row* out);
SPC_API spc_status spc_table_write_csv(const spc_table* table, const char* path);

/* Emit plot-ready files: one CSV per (model, location[, phi]) with the
 * severity grid as x column and one value/std-error column pair per
 * scale kind. */
SPC_API spc_status spc_table_write_figure_data(const spc_table* table, const char* out_dir);
SPC_API void spc_table_destroy(spc_table* table);

/* ---- one-shot reproduction ------------------------------------------ */

typedef struct spc_reproduce_options {
  int n, k;
  int64_t mse_replicates;
  int64_t arl_replicates;
  int64_t calibration_replicates;
  double target_arl0;
  uint64_t seed;
  const char* config_echo;
} spc_reproduce_options;

/* Run the full default grid (MSE + ARL studies sharing Phase I draws),
 * write study CSVs, figure data and the trend-check summary under
 * out_dir. options may be NULL for all defaults. */
SPC_API spc_status spc_reproduce(spc_context* ctx, const spc_reproduce_options* options,
                                 const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif /* SPC_SPC_H */
