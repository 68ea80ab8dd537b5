#ifndef SKETCHLS_H
#define SKETCHLS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum SlsStatus {
  SLS_STATUS_OK = 0,
  SLS_STATUS_NULL_POINTER = 1,
  SLS_STATUS_DIMENSION_MISMATCH = 2,
  SLS_STATUS_NON_FINITE = 3,
  SLS_STATUS_NOT_POSITIVE_DEFINITE = 4,
  SLS_STATUS_SINGULAR_MATRIX = 5,
  SLS_STATUS_RANK_DEFICIENT = 6,
  SLS_STATUS_NOT_POWER_OF_TWO = 7,
  SLS_STATUS_BAD_SUBSAMPLE_SIZE = 8,
  SLS_STATUS_HYPOTHESIS_VIOLATED = 9,
  SLS_STATUS_ZERO_DIRECTION = 10,
  SLS_STATUS_EMPTY_INPUT = 11,
  SLS_STATUS_INVALID_ARGUMENT = 12,
  SLS_STATUS_BUFFER_TOO_SMALL = 13,
  SLS_STATUS_PANIC = 99,
} SlsStatus;

/**
 * How `sls_lambda_rule` chooses the ridge parameter.
 */
typedef enum SlsLambdaRule {
  /**
   * `0.1 · Σ‖x_i‖²`.
   */
  SLS_LAMBDA_RULE_CONCENTRATED = 0,
  /**
   * `0.4 · Σ‖x_i‖²`.
   */
  SLS_LAMBDA_RULE_HEAVY_TAILED = 1,
  /**
   * `value · Σ‖x_i‖²`.
   */
  SLS_LAMBDA_RULE_PROPORTION = 2,
} SlsLambdaRule;

/**
 * Random sketch used by the iterative Hessian sketch.
 */
typedef enum SlsSketch {
  SLS_SKETCH_SRHT = 0,
  SLS_SKETCH_LEVERAGE = 1,
  SLS_SKETCH_UNIFORM = 2,
} SlsSketch;

/**
 * Opaque dense matrix.
 */
typedef struct SlsMatrix SlsMatrix;

/**
 * Opaque record of an iterative solve.
 */
typedef struct SlsTrace SlsTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sls_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *sls_last_error(void);

/**
 * Copies `rows × cols` row-major values into a new matrix.
 *
 * # Safety
 * `data` must point to `rows * cols` readable doubles; `out` must be
 * writable.
 */
enum SlsStatus sls_matrix_new(size_t rows, size_t cols, const double *data, struct SlsMatrix **out);

/**
 * Releases a matrix; null is ignored.
 *
 * # Safety
 * `m` must come from `sls_matrix_new` and not be used afterwards.
 */
void sls_matrix_free(struct SlsMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle or null.
 */
size_t sls_matrix_rows(const struct SlsMatrix *m);

/**
 * # Safety
 * `m` must be a live matrix handle or null.
 */
size_t sls_matrix_cols(const struct SlsMatrix *m);

/**
 * Full least-squares solution into `beta_out` (length at least `cols`).
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum SlsStatus sls_full_ls(const struct SlsMatrix *x,
                           const double *y,
                           size_t y_len,
                           double *beta_out,
                           size_t beta_len);

/**
 * Indices (ascending) of the `m` rows of largest norm.
 *
 * # Safety
 * `indices_out` must hold at least `m` values.
 */
enum SlsStatus sls_aopt_select(const struct SlsMatrix *x,
                               size_t m,
                               size_t *indices_out,
                               size_t indices_len);

/**
 * Ridge parameter for `x`. `value` is the proportion for
 * `SLS_LAMBDA_RULE_PROPORTION` and ignored otherwise.
 *
 * # Safety
 * `lambda_out` must be writable.
 */
enum SlsStatus sls_lambda_rule(const struct SlsMatrix *x,
                               enum SlsLambdaRule rule,
                               double value,
                               double *lambda_out);

/**
 * Conditioning improvement `1 − κ(M⁻¹XᵀX)/κ(XᵀX)` of the ridged
 * largest-norm preconditioner with `m` rows and ridge `lambda`.
 *
 * # Safety
 * `delta_out` must be writable.
 */
enum SlsStatus sls_delta(const struct SlsMatrix *x, size_t m, double lambda, double *delta_out);

/**
 * A-optimal IHS: largest-norm initializer, ridged preconditioner, exact
 * line search. The trace records distances to the full least-squares
 * solution.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to free with
 * `sls_trace_free`.
 */
enum SlsStatus sls_aopt_ihs_solve(const struct SlsMatrix *x,
                                  const double *y,
                                  size_t y_len,
                                  size_t m,
                                  size_t n_iter,
                                  double lambda,
                                  struct SlsTrace **out);

/**
 * Iterative Hessian sketch from zero with a fresh sketch per iteration.
 *
 * # Safety
 * Pointers must be valid; `out` receives a handle to free with
 * `sls_trace_free`.
 */
enum SlsStatus sls_ihs_solve(const struct SlsMatrix *x,
                             const double *y,
                             size_t y_len,
                             size_t m,
                             size_t n_iter,
                             enum SlsSketch kind,
                             uint64_t seed,
                             struct SlsTrace **out);

/**
 * Releases a trace; null is ignored.
 *
 * # Safety
 * `t` must come from a solve call and not be used afterwards.
 */
void sls_trace_free(struct SlsTrace *t);

/**
 * Iterations performed; the trace holds `iterations + 1` estimates.
 *
 * # Safety
 * `t` must be a live trace handle or null.
 */
size_t sls_trace_iterations(const struct SlsTrace *t);

/**
 * Coefficient dimension of the trace's estimates.
 *
 * # Safety
 * `t` must be a live trace handle or null.
 */
size_t sls_trace_dim(const struct SlsTrace *t);

/**
 * Copies estimate `iter` (0 is the initializer).
 *
 * # Safety
 * `beta_out` must hold at least `sls_trace_dim(t)` values.
 */
enum SlsStatus sls_trace_beta(const struct SlsTrace *t,
                              size_t iter,
                              double *beta_out,
                              size_t beta_len);

/**
 * Step length of iteration `iter` (1-based); unit-step methods report 1.
 *
 * # Safety
 * `alpha_out` must be writable.
 */
enum SlsStatus sls_trace_alpha(const struct SlsTrace *t, size_t iter, double *alpha_out);

/**
 * `½‖Xβ_t − y‖²` and `‖β_t − β^LS‖₂` at estimate `iter`.
 *
 * # Safety
 * Output pointers must be writable.
 */
enum SlsStatus sls_trace_errors(const struct SlsTrace *t,
                                size_t iter,
                                double *objective_out,
                                double *dist_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKETCHLS_H */
