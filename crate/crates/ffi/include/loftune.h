#ifndef LOFTUNE_H
#define LOFTUNE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum LtStatus {
  LT_STATUS_OK = 0,
  LT_STATUS_NULL_POINTER = 1,
  /**
   * Bad shape, non-finite value or out-of-range parameter.
   */
  LT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Grid contamination too small or large for the number of rows.
   */
  LT_STATUS_INFEASIBLE = 3,
  /**
   * Metric undefined for the given labels.
   */
  LT_STATUS_ONE_CLASS = 4,
  LT_STATUS_IO = 5,
  /**
   * Model file unreadable or inconsistent.
   */
  LT_STATUS_BAD_MODEL = 6,
  LT_STATUS_PANIC = 7,
} LtStatus;

/**
 * Opaque tuned model.
 */
typedef struct LtModel LtModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *lt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lt_version(void);

/**
 * Tunes `(c, k)` on `n x p` training rows over the given grid.
 *
 * # Safety
 * `data` must hold `n * p` doubles, `cs` `n_c` doubles, `ks` `n_k` values
 * and `out` must be writable. On success `*out` owns a new model.
 */
enum LtStatus lt_tune(const double *data,
                      size_t n,
                      size_t p,
                      const double *cs,
                      size_t n_c,
                      const size_t *ks,
                      size_t n_k,
                      struct LtModel **out);

/**
 * Like [`lt_tune`] after projecting the rows to `project_dim` dimensions
 * with the Gaussian projection seeded by `seed`.
 *
 * # Safety
 * Same as [`lt_tune`].
 */
enum LtStatus lt_tune_projected(const double *data,
                                size_t n,
                                size_t p,
                                const double *cs,
                                size_t n_c,
                                const size_t *ks,
                                size_t n_k,
                                size_t project_dim,
                                uint64_t seed,
                                struct LtModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must come from this library and not be used afterwards.
 */
void lt_model_free(struct LtModel *model);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum LtStatus lt_model_load(const char *path, struct LtModel **out);

/**
 * # Safety
 * `model` must be a live handle and `path` a NUL-terminated string.
 */
enum LtStatus lt_model_save(const struct LtModel *model, const char *path);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum LtStatus lt_model_k_opt(const struct LtModel *model, size_t *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum LtStatus lt_model_c_opt(const struct LtModel *model, double *out);

/**
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum LtStatus lt_model_threshold(const struct LtModel *model, double *out);

/**
 * Number of columns the model expects from callers (before projection).
 *
 * # Safety
 * `model` must be a live handle and `out` writable.
 */
enum LtStatus lt_model_input_dim(const struct LtModel *model, size_t *out);

/**
 * Novelty LOF of each of `n` query rows into `scores[n]`.
 *
 * # Safety
 * `data` must hold `n * p` doubles and `scores` room for `n`.
 */
enum LtStatus lt_model_score(const struct LtModel *model,
                             const double *data,
                             size_t n,
                             size_t p,
                             double *scores);

/**
 * Anomaly flags (1 or 0) of each of `n` query rows into `flags[n]`.
 *
 * # Safety
 * `data` must hold `n * p` doubles and `flags` room for `n`.
 */
enum LtStatus lt_model_predict(const struct LtModel *model,
                               const double *data,
                               size_t n,
                               size_t p,
                               uint8_t *flags);

/**
 * LOF of every training row at neighborhood size `k` into `scores[n]`.
 *
 * # Safety
 * `data` must hold `n * p` doubles and `scores` room for `n`.
 */
enum LtStatus lt_lof_scores(const double *data, size_t n, size_t p, size_t k, double *scores);

/**
 * P(T < x) for a noncentral t with `df` degrees of freedom.
 *
 * # Safety
 * `out` must be writable.
 */
enum LtStatus lt_noncentral_t_cdf(double x, double df, double ncp, double *out);

/**
 * # Safety
 * `truth` must hold `n` bytes, `scores` `n` doubles, `out` writable.
 */
enum LtStatus lt_roc_auc(const uint8_t *truth, const double *scores, size_t n, double *out);

/**
 * # Safety
 * `truth` and `predicted` must hold `n` bytes each, `out` writable.
 */
enum LtStatus lt_f1_score(const uint8_t *truth, const uint8_t *predicted, size_t n, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOFTUNE_H */
