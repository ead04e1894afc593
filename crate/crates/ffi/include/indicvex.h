#ifndef INDICVEX_H
#define INDICVEX_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IvxStatus {
  IVX_STATUS_OK = 0,
  IVX_STATUS_NULL_POINTER = 1,
  IVX_STATUS_INVALID_ARGUMENT = 2,
  IVX_STATUS_UNSUPPORTED = 3,
  IVX_STATUS_SIZE_LIMIT = 4,
  IVX_STATUS_INFEASIBLE = 5,
  IVX_STATUS_SOLVER = 6,
  IVX_STATUS_PARSE = 7,
  IVX_STATUS_MISMATCH = 8,
  IVX_STATUS_INTERNAL = 9,
} IvxStatus;

typedef enum IvxDenoisingKind {
  IVX_DENOISING_KIND_BASIC = 0,
  IVX_DENOISING_KIND_RANK_ONE = 1,
  IVX_DENOISING_KIND_RANK_TWO = 2,
} IvxDenoisingKind;

typedef enum IvxFormat {
  IVX_FORMAT_LP = 0,
  IVX_FORMAT_MPS = 1,
  IVX_FORMAT_JSON = 2,
} IvxFormat;

/**
 * An extended formulation.
 */
typedef struct IvxFormulation IvxFormulation;

/**
 * A univariate convex function.
 */
typedef struct IvxFunction IvxFunction;

/**
 * Parameters of a generated denoising formulation. Negative counts mean the
 * size-derived default.
 */
typedef struct IvxDenoisingParams {
  size_t n;
  size_t ell;
  double omega;
  uint64_t seed;
  int64_t k1;
  int64_t k2;
  int64_t spikes;
  enum IvxDenoisingKind kind;
} IvxDenoisingParams;

/**
 * Metric percentages; NaN marks an undefined value. Inputs use NaN for absent.
 */
typedef struct IvxMetrics {
  double igap;
  double egap;
  double ri_basic;
  double ri_rankone;
} IvxMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *ivx_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ivx_string_free(char *s);

/**
 * Kind 0: `param·s²`; 1: `|s|`; 2: `|s|^param`; 3: Huber with threshold `param`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IvxStatus ivx_function_new(uint32_t kind, double param, struct IvxFunction **out_fn);

/**
 * # Safety
 * `f` must come from [`ivx_function_new`] and not be freed twice.
 */
void ivx_function_free(struct IvxFunction *f);

/**
 * # Safety
 * Pointers must be valid.
 */
enum IvxStatus ivx_function_eval(const struct IvxFunction *f, double s, double *value);

/**
 * `λ·g(v/λ)`, with the recession function at `λ = 0`; may be `+∞`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IvxStatus ivx_function_perspective(const struct IvxFunction *f,
                                        double v,
                                        double lambda,
                                        double *value);

/**
 * Envelope of `g(aᵀx)` with indicators at `(x, z)`. `nonneg` lists
 * zero-based indices constrained to `x_i ≥ 0`. The value may be `+∞`.
 *
 * # Safety
 * `a`, `x`, `z` must hold `n` values; `nonneg` must hold `n_nonneg`.
 */
enum IvxStatus ivx_envelope(const struct IvxFunction *g,
                            const double *a,
                            size_t n,
                            const size_t *nonneg,
                            size_t n_nonneg,
                            const double *x,
                            const double *z,
                            double *value);

/**
 * Rotated-cone hull formulation of `(aᵀx)²` with indicators.
 *
 * # Safety
 * `a` must hold `n` values, `nonneg` `n_nonneg`; `out_form` must be valid.
 */
enum IvxStatus ivx_rank1_conic(const double *a,
                               size_t n,
                               const size_t *nonneg,
                               size_t n_nonneg,
                               struct IvxFormulation **out_form);

/**
 * Seeded denoising instance and one of its formulations.
 *
 * # Safety
 * `params` and `out_form` must be valid.
 */
enum IvxStatus ivx_denoising_build(const struct IvxDenoisingParams *params,
                                   struct IvxFormulation **out_form);

/**
 * Reads a JSON formulation.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out_form` must be valid.
 */
enum IvxStatus ivx_formulation_from_json(const char *json, struct IvxFormulation **out_form);

/**
 * # Safety
 * `f` must come from this library and not be freed twice.
 */
void ivx_formulation_free(struct IvxFormulation *f);

/**
 * # Safety
 * Pointers must be valid.
 */
enum IvxStatus ivx_formulation_counts(const struct IvxFormulation *f,
                                      size_t *vars,
                                      size_t *binaries);

/**
 * Writes the formulation as text; release it with [`ivx_string_free`].
 *
 * # Safety
 * Pointers must be valid.
 */
enum IvxStatus ivx_formulation_export(const struct IvxFormulation *f,
                                      enum IvxFormat format,
                                      char **text);

/**
 * Continuous relaxation value.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IvxStatus ivx_formulation_relax(const struct IvxFormulation *f, double tol, double *value);

/**
 * Branch and bound; `value` is the incumbent, `bound` the proven lower bound.
 *
 * # Safety
 * Pointers must be valid.
 */
enum IvxStatus ivx_formulation_bnb(const struct IvxFormulation *f,
                                   double rel_gap,
                                   size_t node_limit,
                                   double *value,
                                   double *bound,
                                   size_t *nodes);

/**
 * Gap percentages. Pass NaN for any absent input.
 *
 * # Safety
 * `report` must be valid.
 */
enum IvxStatus ivx_metrics(double best,
                           double cont,
                           double basic,
                           double rankone,
                           double ranktwo,
                           double bound,
                           struct IvxMetrics *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INDICVEX_H */
