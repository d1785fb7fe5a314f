#ifndef VGARROTE_H
#define VGARROTE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VgSolver {
  VG_SOLVER_AUTO = 0,
  VG_SOLVER_PRIMAL = 1,
  VG_SOLVER_DUAL = 2,
} VgSolver;

typedef enum VgStatus {
  VG_STATUS_OK = 0,
  VG_STATUS_NULL_POINTER = 1,
  VG_STATUS_INVALID_ARGUMENT = 2,
  VG_STATUS_INVALID_DATA = 3,
  VG_STATUS_NUMERICAL = 4,
  VG_STATUS_BUFFER_TOO_SMALL = 5,
  VG_STATUS_PANIC = 6,
} VgStatus;

typedef enum VgVector {
  /**
   * Selector means `m`.
   */
  VG_VECTOR_INCLUSION = 0,
  /**
   * Weights `w`.
   */
  VG_VECTOR_WEIGHTS = 1,
  /**
   * Effective coefficients `m ∘ w`.
   */
  VG_VECTOR_COEFFICIENTS = 2,
} VgVector;

/**
 * A fitted model.
 */
typedef struct VgModel VgModel;

typedef struct VgFitOptions {
  enum VgSolver solver;
  double epsilon;
  double tol;
  size_t max_iter;
} VgFitOptions;

typedef struct VgModelSummary {
  double gamma;
  double beta;
  double free_energy;
  double intercept;
  size_t nonzero;
  bool converged;
} VgModelSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Text of the last error on this thread, empty after a successful call.
 * Valid until the next call into this library from the same thread.
 */
const char *vg_last_error(void);

struct VgFitOptions vg_fit_options_default(void);

/**
 * Fits a model on `p_train` training rows, choosing `gamma` on `p_val`
 * validation rows. `opts` may be null for defaults. On success `*out`
 * owns a new model.
 *
 * # Safety
 * Array arguments must hold `rows * n_features` (inputs) or `rows`
 * (outputs) doubles; `out` must be writable.
 */
enum VgStatus vg_fit(const double *x_train,
                     const double *y_train,
                     size_t p_train,
                     const double *x_val,
                     const double *y_val,
                     size_t p_val,
                     size_t n_features,
                     const struct VgFitOptions *opts,
                     struct VgModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or come from [`vg_fit`] and not be freed already.
 */
void vg_model_free(struct VgModel *model);

/**
 * Predicts `rows` outputs into `out`.
 *
 * # Safety
 * `x` must hold `rows * n_features` doubles and `out` room for `rows`.
 */
enum VgStatus vg_predict(const struct VgModel *model,
                         const double *x,
                         size_t rows,
                         size_t n_features,
                         double *out);

/**
 * # Safety
 * `model` must be a live model or null.
 */
enum VgStatus vg_model_num_features(const struct VgModel *model, size_t *out);

/**
 * Copies one per-feature vector into `out`, which must hold `len ≥ n`
 * doubles.
 *
 * # Safety
 * `model` must be a live model; `out` must hold `len` doubles.
 */
enum VgStatus vg_model_vector(const struct VgModel *model,
                              enum VgVector which,
                              double *out,
                              size_t len);

/**
 * # Safety
 * `model` must be a live model; `out` must be writable.
 */
enum VgStatus vg_model_summary(const struct VgModel *model, struct VgModelSummary *out);

/**
 * Correlation above which the univariate problem can be bistable.
 */
double vg_rho_star(size_t p, double delta);

/**
 * `gamma` of the univariate critical point.
 */
double vg_gamma_star(size_t p, double delta);

/**
 * Bounds of the `gamma` interval with two stable univariate solutions.
 *
 * # Safety
 * `lower` and `upper` must be writable.
 */
enum VgStatus vg_bistable_gamma_range(double rho,
                                      size_t p,
                                      double delta,
                                      double *lower,
                                      double *upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VGARROTE_H */
