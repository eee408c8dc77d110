#ifndef CVOL_H
#define CVOL_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by the compute entry points.
 */
typedef enum {
  CVOL_STATUS_OK = 0,
  /**
   * Invalid arguments (null pointers, bad UTF-8).
   */
  CVOL_STATUS_USAGE = 1,
  /**
   * PD text or JSON could not be parsed into a planar diagram.
   */
  CVOL_STATUS_PARSE_ERROR = 2,
  /**
   * No irreducible parabolic coloring was found.
   */
  CVOL_STATUS_SOLVER_FAILURE = 3,
  /**
   * The lift stayed degenerate or the coloring is reducible.
   */
  CVOL_STATUS_DEGENERACY = 4,
  /**
   * Numerical breakdown (integrality, closedness, consistency).
   */
  CVOL_STATUS_NUMERICAL = 5,
} CvolStatus;

/**
 * Opaque result handle.
 */
typedef struct CvolResult CvolResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Compute the complex volume of the link described by a PD code
 * (text grammar or JSON). On success writes a handle to `out` and
 * returns `Ok`; on failure returns a status and leaves a message
 * retrievable via `cvol_last_error_message`.
 *
 * # Safety
 * `pd_text` must be a valid NUL-terminated string and `out` a valid
 * pointer; the returned handle must be released with `cvol_result_free`.
 */
CvolStatus cvol_compute_pd(const char *pd_text,
                           uint64_t seed,
                           uint32_t attempts,
                           double tol,
                           CvolResult **out);

/**
 * Hyperbolic volume (imaginary part of the evaluation).
 *
 * # Safety
 * `result` must be a live handle from `cvol_compute_pd`.
 */
double cvol_result_volume(const CvolResult *result);

/**
 * Chern-Simons invariant, reduced mod π² to (−π²/2, π²/2].
 *
 * # Safety
 * `result` must be a live handle from `cvol_compute_pd`.
 */
double cvol_result_cs(const CvolResult *result);

/**
 * Raw evaluation i(Vol + i CS) mod π² as (re, im).
 *
 * # Safety
 * `result` must be live; `re` and `im` must be writable.
 */
void cvol_result_raw(const CvolResult *result, double *re, double *im);

/**
 * Number of ideal tetrahedra in the evaluated chain.
 *
 * # Safety
 * `result` must be a live handle.
 */
uint32_t cvol_result_tetrahedra(const CvolResult *result);

/**
 * Full result artifact as a JSON string (same schema as the CLI
 * `--out` file). Free with `cvol_string_free`. NULL on error.
 *
 * # Safety
 * `result` must be a live handle.
 */
char *cvol_result_json(const CvolResult *result);

/**
 * Message describing the most recent failure on this thread, or NULL.
 * Free with `cvol_string_free`.
 */
char *cvol_last_error_message(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by this library and not yet freed.
 */
void cvol_string_free(char *s);

/**
 * Release a result handle.
 *
 * # Safety
 * `result` must have been returned by `cvol_compute_pd` and not yet
 * freed.
 */
void cvol_result_free(CvolResult *result);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CVOL_H */
