/* C interface for dockselect. Regenerated by the crate build script; do not edit. */

#ifndef DOCKSELECT_H
#define DOCKSELECT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Operation outcome; zero means success.
 */
typedef enum DselStatus {
  DSEL_STATUS_OK = 0,
  DSEL_STATUS_NULL_ARGUMENT = 1,
  DSEL_STATUS_INVALID_INPUT = 2,
  DSEL_STATUS_INVALID_CONFIG = 3,
  DSEL_STATUS_SHAPE_MISMATCH = 4,
  DSEL_STATUS_SCHEMA_VIOLATION = 5,
  DSEL_STATUS_PARSE_ERROR = 6,
  DSEL_STATUS_VERSION_MISMATCH = 7,
  DSEL_STATUS_IO_ERROR = 8,
  DSEL_STATUS_INTERNAL_ERROR = 9,
} DselStatus;

/**
 * How the geometric and validity scores combine.
 */
typedef enum DselScoreMode {
  DSEL_SCORE_MODE_ADDITIVE = 0,
  DSEL_SCORE_MODE_MULTIPLICATIVE = 1,
} DselScoreMode;

/**
 * Opaque trained-model handle.
 */
typedef struct DselModel DselModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string. Do not free.
 */
const char *dsel_version(void);

/**
 * Returns the calling thread's last error message as a newly allocated
 * string (caller frees via `dsel_string_free`), or NULL when no error has
 * occurred since the last successful call.
 */
char *dsel_last_error_message(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a dockselect function documented as
 * caller-owned, and must not be used afterwards. NULL is ignored.
 */
void dsel_string_free(char *s);

/**
 * Exponential RMSD score clipped at `tolerance_m`; writes into `out`.
 *
 * # Safety
 * `out` must point to writable memory for one `double`.
 */
enum DselStatus dsel_rmsd_score(double rmsd, double tolerance_m, double *out);

/**
 * Composite score of a single docking outcome. `has_pose == false` marks a
 * docking failure (RMSD ignored, score 0).
 *
 * # Safety
 * `out` must point to writable memory for one `double`.
 */
enum DselStatus dsel_composite_score(double rmsd,
                                     bool has_pose,
                                     bool pb_valid,
                                     enum DselScoreMode mode,
                                     double tolerance_m,
                                     double alpha,
                                     double *out);

/**
 * Loads a model checkpoint. Returns NULL on failure (see
 * `dsel_last_error_message`); free the handle with `dsel_model_free`.
 *
 * # Safety
 * `path` must be a NUL-terminated string, valid for the duration of the
 * call.
 */
struct DselModel *dsel_model_load(const char *path);

/**
 * Releases a model handle. NULL is ignored.
 *
 * # Safety
 * `model` must come from `dsel_model_load` and must not be used afterwards.
 */
void dsel_model_free(struct DselModel *model);

/**
 * Feature dimensionality the model expects, or 0 for NULL.
 *
 * # Safety
 * `model` must be a live handle from `dsel_model_load` or NULL.
 */
uintptr_t dsel_model_input_dim(const struct DselModel *model);

/**
 * Number of portfolio algorithms the model scores, or 0 for NULL.
 *
 * # Safety
 * `model` must be a live handle from `dsel_model_load` or NULL.
 */
uintptr_t dsel_model_output_dim(const struct DselModel *model);

/**
 * Name of the algorithm behind output column `index`, as a caller-owned
 * string; NULL when the model is NULL or the index is out of range.
 *
 * # Safety
 * `model` must be a live handle from `dsel_model_load` or NULL.
 */
char *dsel_model_algorithm_name(const struct DselModel *model, uintptr_t index);

/**
 * Predicted per-algorithm scores for one feature vector. The stored
 * feature scaler, if any, is applied first. `out_scores` receives exactly
 * `dsel_model_output_dim` values, so `out_len` must equal it.
 *
 * # Safety
 * `features` must point to `features_len` readable doubles and
 * `out_scores` to `out_len` writable doubles.
 */
enum DselStatus dsel_model_predict(const struct DselModel *model,
                                   const double *features,
                                   uintptr_t features_len,
                                   double *out_scores,
                                   uintptr_t out_len);

/**
 * Argmax algorithm selection (ties resolve to the lowest index); writes the
 * selected column into `out_index`.
 *
 * # Safety
 * `features` must point to `features_len` readable doubles and `out_index`
 * to one writable `size_t`.
 */
enum DselStatus dsel_model_select(const struct DselModel *model,
                                  const double *features,
                                  uintptr_t features_len,
                                  uintptr_t *out_index);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DOCKSELECT_H */
