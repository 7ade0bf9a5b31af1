#ifndef EQALG_H
#define EQALG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EqalgInvariance {
  EQALG_INVARIANCE_ABSOLUTE = 0,
  EQALG_INVARIANCE_RELATIVE = 1,
  EQALG_INVARIANCE_NEITHER = 2,
} EqalgInvariance;

typedef enum EqalgSource {
  EQALG_SOURCE_PAPER = 0,
  EQALG_SOURCE_DERIVED = 1,
} EqalgSource;

typedef enum EqalgStatus {
  EQALG_STATUS_OK = 0,
  EQALG_STATUS_NULL_POINTER = 1,
  EQALG_STATUS_INVALID_UTF8 = 2,
  EQALG_STATUS_PARSE = 3,
  EQALG_STATUS_INVALID_ARGUMENT = 4,
  EQALG_STATUS_MATH = 5,
  EQALG_STATUS_PANIC = 6,
} EqalgStatus;

typedef enum EqalgVerdict {
  EQALG_VERDICT_EQUIVALENT_PER_CRITERION = 0,
  EQALG_VERDICT_NOT_EQUIVALENT = 1,
  EQALG_VERDICT_BOTH_DEGENERATE = 2,
  EQALG_VERDICT_MIXED_DEGENERATE = 3,
} EqalgVerdict;

/**
 * A canonical expression over the order-2 chart.
 */
typedef struct EqalgExpr EqalgExpr;

/**
 * A discretized generator set `{Y0, Y1, Y2, Y3, Y^0, ..., Y^K}`.
 */
typedef struct EqalgGenerators EqalgGenerators;

typedef struct EqalgRankResult {
  uint32_t order;
  size_t rank;
  size_t variable_count;
  size_t invariant_count;
  size_t samples_used;
} EqalgRankResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy of the last error message on this thread, or null if the last call
 * succeeded. Release with [`eqalg_string_free`].
 */
char *eqalg_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, released once.
 */
void eqalg_string_free(char *s);

/**
 * Parses and canonicalizes an expression over the order-2 chart. The names
 * `R`, `R1_printed`, `R1_corrected` and `R2` are predefined.
 *
 * # Safety
 * `text` must be a nul-terminated string and `out` a valid pointer.
 */
enum EqalgStatus eqalg_expr_parse(const char *text, struct EqalgExpr **out);

/**
 * Canonical text of an expression, or null for a null handle. Release with
 * [`eqalg_string_free`].
 *
 * # Safety
 * `e` must be null or a live handle.
 */
char *eqalg_expr_to_string(const struct EqalgExpr *e);

/**
 * # Safety
 * Handles must be live and `out` valid.
 */
enum EqalgStatus eqalg_expr_equals(const struct EqalgExpr *a, const struct EqalgExpr *b, bool *out);

/**
 * # Safety
 * `e` must be null or a handle from [`eqalg_expr_parse`], released once.
 */
void eqalg_expr_free(struct EqalgExpr *e);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum EqalgStatus eqalg_generators_build(enum EqalgSource source,
                                        uint32_t k,
                                        struct EqalgGenerators **out);

/**
 * Number of generators, or 0 for a null handle.
 *
 * # Safety
 * `g` must be null or a live handle.
 */
size_t eqalg_generators_len(const struct EqalgGenerators *g);

/**
 * # Safety
 * `g` must be null or a handle from [`eqalg_generators_build`], released once.
 */
void eqalg_generators_free(struct EqalgGenerators *g);

/**
 * Sampled generic rank of the order-`order` prolongation.
 *
 * # Safety
 * `g` must be a live handle and `out` valid.
 */
enum EqalgStatus eqalg_rank(const struct EqalgGenerators *g,
                            uint32_t order,
                            uint64_t seed,
                            size_t samples,
                            struct EqalgRankResult *out);

/**
 * Largest closing `k`, or -1 if no truncation closes.
 *
 * # Safety
 * `g` must be a live handle and `out` valid.
 */
enum EqalgStatus eqalg_closure_max_k(const struct EqalgGenerators *g, int32_t *out);

/**
 * Overall invariance of `e` under the prolonged generators.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum EqalgStatus eqalg_is_absolute(const struct EqalgExpr *e,
                                   const struct EqalgGenerators *g,
                                   uint32_t order,
                                   enum EqalgInvariance *out);

/**
 * Compares two right-hand sides `f(u, sigma)` by their signatures.
 *
 * # Safety
 * Strings must be nul-terminated and `out` valid.
 */
enum EqalgStatus eqalg_check_equivalence(const char *f1, const char *f2, enum EqalgVerdict *out);

/**
 * Signature of `f(u, sigma)` as JSON
 * `{"degenerate": bool, "rho1": string|null, "rho2": string|null}`.
 * Release the result with [`eqalg_string_free`].
 *
 * # Safety
 * `f` must be nul-terminated and `out` valid.
 */
enum EqalgStatus eqalg_signature_json(const char *f, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EQALG_H */
