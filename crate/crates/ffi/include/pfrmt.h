#ifndef PFRMT_H
#define PFRMT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum PfrmtStatus {
  PFRMT_STATUS_OK = 0,
  PFRMT_STATUS_NULL_POINTER = 1,
  PFRMT_STATUS_INVALID_ARGUMENT = 2,
  PFRMT_STATUS_CONFIG = 3,
  PFRMT_STATUS_DIMENSION = 4,
  PFRMT_STATUS_NUMERIC = 5,
  PFRMT_STATUS_SINGULAR_MATRIX = 6,
  PFRMT_STATUS_DEGENERATE_SHIFT = 7,
  PFRMT_STATUS_UNSUPPORTED_REDUCTION = 8,
  PFRMT_STATUS_DIVERGENT_MOMENT = 9,
  PFRMT_STATUS_ON_SUPPORT = 10,
  PFRMT_STATUS_REGIME = 11,
  PFRMT_STATUS_BREAKDOWN = 12,
  PFRMT_STATUS_BUDGET = 13,
  PFRMT_STATUS_UNSUPPORTED_ORACLE = 14,
  PFRMT_STATUS_IO = 15,
  PFRMT_STATUS_PANIC = 99,
} PfrmtStatus;

/**
 * Opaque ensemble handle.
 */
typedef struct PfrmtEnsemble PfrmtEnsemble;

typedef struct PfrmtComplex {
  double re;
  double im;
} PfrmtComplex;

/**
 * `regime`: 0 even-sum, 1 odd-sum, 2 sparse.
 */
typedef struct PfrmtZResult {
  struct PfrmtComplex value;
  int32_t regime;
  int64_t d;
} PfrmtZResult;

/**
 * 0 = K11, 1 = K12, 2 = K22.
 */
typedef int32_t PfrmtKernelKind;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *pfrmt_version(void);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *pfrmt_last_error_message(void);

/**
 * Creates an ensemble by id (`"gauss-beta1"`, `"gauss-beta4"`,
 * `"laguerre-beta1"`, `"laguerre-beta4"`); `nu` is ignored for gauss.
 *
 * # Safety
 * `id` must be a nul-terminated string and `out` a valid pointer.
 */
enum PfrmtStatus pfrmt_ensemble_new(const char *id, uint32_t nu, struct PfrmtEnsemble **out);

/**
 * # Safety
 * `e` must come from [`pfrmt_ensemble_new`] and not be used afterwards. Null is ignored.
 */
void pfrmt_ensemble_free(struct PfrmtEnsemble *e);

/**
 * 1 or 4, or 0 for a null handle.
 *
 * # Safety
 * `e` must be null or a live handle.
 */
uint8_t pfrmt_ensemble_beta(const struct PfrmtEnsemble *e);

/**
 * Unnormalized ordered-eigenvalue average by the Pfaffian formulas; `n` is
 * the matrix dimension (β=1) or quaternion dimension (β=4).
 *
 * # Safety
 * Arrays must hold `k1` / `k2` entries; `e` and `out` must be valid.
 */
enum PfrmtStatus pfrmt_z(const struct PfrmtEnsemble *e,
                         size_t n,
                         const struct PfrmtComplex *kappa1,
                         size_t k1,
                         const struct PfrmtComplex *kappa2,
                         size_t k2,
                         int32_t precision,
                         struct PfrmtZResult *out);

/**
 * Quadrature oracle for the same integral as [`pfrmt_z`]; `error` receives
 * the node-halving error estimate and may be null.
 *
 * # Safety
 * As for [`pfrmt_z`].
 */
enum PfrmtStatus pfrmt_oracle_quadrature(const struct PfrmtEnsemble *e,
                                         size_t n,
                                         const struct PfrmtComplex *kappa1,
                                         size_t k1,
                                         const struct PfrmtComplex *kappa2,
                                         size_t k2,
                                         size_t nodes_per_dim,
                                         struct PfrmtComplex *value,
                                         double *error);

/**
 * Pfaffian of a `dim × dim` antisymmetric matrix given row-major.
 *
 * # Safety
 * `a` must hold `dim * dim` entries.
 */
enum PfrmtStatus pfrmt_pfaffian(const struct PfrmtComplex *a, size_t dim, struct PfrmtComplex *out);

/**
 * Evaluates `count` kernel values `K(xs[i], ys[i])` for the kernel set of an
 * `n`-dimensional matrix average (moment block `d = n` for β=1, `2n` for β=4).
 *
 * # Safety
 * `xs`, `ys` and `out` must hold `count` entries.
 */
enum PfrmtStatus pfrmt_kernel_eval(const struct PfrmtEnsemble *e,
                                   size_t n,
                                   PfrmtKernelKind kind,
                                   const struct PfrmtComplex *xs,
                                   const struct PfrmtComplex *ys,
                                   size_t count,
                                   struct PfrmtComplex *out);

/**
 * Runs a `compute` configuration given as JSON and returns the result
 * document; free it with [`pfrmt_string_free`].
 *
 * # Safety
 * `config_json` must be a nul-terminated string and `out` a valid pointer.
 */
enum PfrmtStatus pfrmt_compute_json(const char *config_json, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void pfrmt_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PFRMT_H */
