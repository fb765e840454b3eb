#ifndef KSREDUCE_H
#define KSREDUCE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define KS_CHART_R3 3

#define KS_CHART_R4 4

typedef enum KsStatus {
  KS_STATUS_OK = 0,
  KS_STATUS_NULL_POINTER = 1,
  KS_STATUS_INVALID_UTF8 = 2,
  KS_STATUS_PARSE = 3,
  KS_STATUS_INVALID_ARGUMENT = 4,
  KS_STATUS_CHART_MISMATCH = 5,
  KS_STATUS_NOT_FIBER_INVARIANT = 6,
  KS_STATUS_NOT_DESCENDABLE = 7,
  KS_STATUS_NOT_PROJECTABLE = 8,
  KS_STATUS_UNSUPPORTED = 9,
  KS_STATUS_INTERNAL = 10,
  KS_STATUS_PANIC = 11,
} KsStatus;

/**
 * Opaque coefficient function.
 */
typedef struct KsCoeff KsCoeff;

/**
 * Opaque differential operator.
 */
typedef struct KsOperator KsOperator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next call into this library on the same thread.
 */
const char *ks_last_error(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void ks_string_free(char *s);

/**
 * Parse an operator literal on chart `KS_CHART_R3` or `KS_CHART_R4`.
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` a writable pointer.
 */
enum KsStatus ks_operator_parse(const char *text, uint32_t chart_id, struct KsOperator **out);

/**
 * # Safety
 * `op` must be null or a handle from this library that has not been freed.
 */
void ks_operator_free(struct KsOperator *op);

/**
 * Canonical text of `op`, or null on failure. Free with [`ks_string_free`].
 *
 * # Safety
 * `op` must be a live handle.
 */
char *ks_operator_to_string(const struct KsOperator *op);

/**
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum KsStatus ks_operator_degree(const struct KsOperator *op, uint32_t *out);

/**
 * `[a, b]` as a new handle.
 *
 * # Safety
 * `a`, `b` must be live handles and `out` writable.
 */
enum KsStatus ks_operator_commutator(const struct KsOperator *a,
                                     const struct KsOperator *b,
                                     struct KsOperator **out);

/**
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum KsStatus ks_operator_is_projectable(const struct KsOperator *op, bool *out);

/**
 * Projection of a 4D operator to the 3D chart as a new handle.
 *
 * # Safety
 * `op` must be a live handle and `out` writable.
 */
enum KsStatus ks_operator_project(const struct KsOperator *op, struct KsOperator **out);

/**
 * Parse a coefficient literal (no derivatives).
 *
 * # Safety
 * `text` must be a valid NUL-terminated string and `out` writable.
 */
enum KsStatus ks_coeff_parse(const char *text, uint32_t chart_id, struct KsCoeff **out);

/**
 * # Safety
 * `c` must be null or a handle from this library that has not been freed.
 */
void ks_coeff_free(struct KsCoeff *c);

/**
 * Canonical text of `c`, or null on failure. Free with [`ks_string_free`].
 *
 * # Safety
 * `c` must be a live handle.
 */
char *ks_coeff_to_string(const struct KsCoeff *c);

/**
 * # Safety
 * `c` must be a live handle and `out` writable.
 */
enum KsStatus ks_coeff_pullback(const struct KsCoeff *c, struct KsCoeff **out);

/**
 * # Safety
 * `c` must be a live handle and `out` writable.
 */
enum KsStatus ks_coeff_descend(const struct KsCoeff *c, struct KsCoeff **out);

/**
 * Admissible energy `-2k^2/(n+2)^2` as a reduced fraction.
 *
 * # Safety
 * `num` and `den` must be writable.
 */
enum KsStatus ks_admissible_energy(int64_t k_num,
                                   int64_t k_den,
                                   uint32_t n,
                                   int64_t *num,
                                   int64_t *den);

/**
 * Multiplicity of the fiber-invariant part of oscillator level `n` at coupling `k`.
 *
 * # Safety
 * `out` must be writable.
 */
enum KsStatus ks_kernel_dimension(uint32_t n, int64_t k_num, int64_t k_den, size_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KSREDUCE_H */
