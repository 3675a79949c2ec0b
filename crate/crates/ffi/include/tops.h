#ifndef TOPS_H
#define TOPS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TopsAdfVariant {
  TOPS_ADF_VARIANT_CONSTANT = 0,
  TOPS_ADF_VARIANT_CONSTANT_AND_TREND = 1,
} TopsAdfVariant;

typedef enum TopsStatus {
  TOPS_STATUS_OK = 0,
  TOPS_STATUS_NULL_POINTER = 1,
  TOPS_STATUS_INVALID_ARGUMENT = 2,
  TOPS_STATUS_INPUT_ERROR = 3,
  TOPS_STATUS_COMPUTATION_ERROR = 4,
  TOPS_STATUS_BUFFER_TOO_SMALL = 5,
  TOPS_STATUS_PANIC = 6,
} TopsStatus;

/**
 * Lead-lag path sampled on the calendar of the second series.
 */
typedef struct TopsPath TopsPath;

typedef struct TopsSummary {
  size_t n;
  double mean;
  double maximum;
  double minimum;
  double std_dev;
  double skewness;
  /**
   * Raw kurtosis, 3 for a normal sample.
   */
  double kurtosis;
} TopsSummary;

typedef struct TopsTestResult {
  double statistic;
  double p_value;
} TopsTestResult;

typedef struct TopsRegression {
  double intercept;
  double slope;
  double slope_std_err;
  double t_stat;
  double p_value;
  size_t n_obs;
} TopsRegression;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *tops_last_error_message(void);

/**
 * Runs the thermal optimal path ensemble on `x` and `y` (both length `n`).
 *
 * With `standardize_inputs` nonzero both series are z-scored first. On
 * success `*out` receives a handle owned by the caller.
 *
 * # Safety
 * `x` and `y` must point to `n` readable doubles; `out` must be writable.
 */
enum TopsStatus tops_ensemble_run(const double *x,
                                  const double *y,
                                  size_t n,
                                  size_t margin,
                                  double temperature,
                                  int32_t standardize_inputs,
                                  struct TopsPath **out);

/**
 * Releases a path handle; null is ignored.
 *
 * # Safety
 * `path` must come from [`tops_ensemble_run`] and not be freed twice.
 */
void tops_path_free(struct TopsPath *path);

/**
 * Number of calendar indices the path covers; 0 for null.
 *
 * # Safety
 * `path` must be a live handle or null.
 */
size_t tops_path_len(const struct TopsPath *path);

/**
 * Copies covered calendar indices and lags (positive: `x` leads `y`).
 * Either output may be null; otherwise each must hold `capacity` entries.
 *
 * # Safety
 * `path` must be live; non-null outputs must be writable for `capacity`.
 */
enum TopsStatus tops_path_copy(const struct TopsPath *path,
                               size_t *indices,
                               double *lags,
                               size_t capacity);

/**
 * Start offsets of the selected member and its free energy per step.
 *
 * # Safety
 * `path` must be live; outputs may be null.
 */
enum TopsStatus tops_path_member(const struct TopsPath *path,
                                 size_t *i1,
                                 size_t *i2,
                                 double *free_energy_per_step);

/**
 * # Safety
 * `x` must point to `n` doubles; `out` must be writable.
 */
enum TopsStatus tops_summary_stats(const double *x, size_t n, struct TopsSummary *out);

/**
 * # Safety
 * `x` must point to `n` doubles; `out` must be writable.
 */
enum TopsStatus tops_jarque_bera(const double *x, size_t n, struct TopsTestResult *out);

/**
 * Augmented Dickey-Fuller test; `variant` is a [`TopsAdfVariant`] value and
 * `lags < 0` selects the automatic order.
 *
 * # Safety
 * `x` must point to `n` doubles; `out` must be writable.
 */
enum TopsStatus tops_adf_test(const double *x,
                              size_t n,
                              int32_t variant,
                              int64_t lags,
                              struct TopsTestResult *out);

/**
 * # Safety
 * `x` and `y` must point to `n` doubles; `out` must be writable.
 */
enum TopsStatus tops_pearson_correlation(const double *x, const double *y, size_t n, double *out);

/**
 * Least squares `y = intercept + slope * x`.
 *
 * # Safety
 * `y` and `x` must point to `n` doubles; `out` must be writable.
 */
enum TopsStatus tops_ols_fit(const double *y,
                             const double *x,
                             size_t n,
                             struct TopsRegression *out);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tops_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TOPS_H */
