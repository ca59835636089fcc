#ifndef SALEM2D_H
#define SALEM2D_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  SALEM2D_STATUS_OK = 0,
  SALEM2D_STATUS_NULL_POINTER = 1,
  SALEM2D_STATUS_INVALID_ARGUMENT = 2,
  SALEM2D_STATUS_OVERFLOW = 3,
  SALEM2D_STATUS_NUMERIC = 4,
  SALEM2D_STATUS_TRUNCATION = 5,
  SALEM2D_STATUS_PARSE = 6,
  SALEM2D_STATUS_IO = 7,
  SALEM2D_STATUS_VERIFICATION = 8,
  SALEM2D_STATUS_SEARCH_FAILURE = 9,
  SALEM2D_STATUS_PANIC = 10,
} Salem2dStatus;

/**
 * Selects the annulus population.
 */
typedef enum {
  SALEM2D_MODE_ALL = 0,
  SALEM2D_MODE_PRIMES = 1,
} Salem2dMode;

/**
 * Opaque handle to one operator `F_M`.
 */
typedef struct Salem2dFm Salem2dFm;

/**
 * Opaque handle to a materialized measure spec.
 */
typedef struct Salem2dMeasure Salem2dMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *salem2d_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *salem2d_version(void);

/**
 * # Safety
 * `dim` must be a valid, writable pointer.
 */
Salem2dStatus salem2d_dimension(double tau, double *dim);

/**
 * Decay weight `g(ξ)` for exponent `a`; `prime_variant` selects the
 * logarithmic correction.
 */
double salem2d_g_weight(double xi_x, double xi_y, double a, bool prime_variant);

/**
 * # Safety
 * `count` must be a valid, writable pointer.
 */
Salem2dStatus salem2d_divisor_count(int64_t re, int64_t im, uint64_t *count);

bool salem2d_is_gaussian_prime(int64_t re, int64_t im);

/**
 * Build `F_M` with shift `θ = (theta_x, theta_y)`.
 *
 * # Safety
 * `handle` must be a valid, writable pointer. On success `*handle` owns a
 * new object to be released with [`salem2d_fm_free`].
 */
Salem2dStatus salem2d_fm_new(double m,
                             double tau,
                             Salem2dMode mode,
                             double theta_x,
                             double theta_y,
                             Salem2dFm **handle);

/**
 * # Safety
 * `handle` is NULL or came from [`salem2d_fm_new`] and was not freed.
 */
void salem2d_fm_free(Salem2dFm *handle);

/**
 * # Safety
 * `handle` must be live; `value` must be writable.
 */
Salem2dStatus salem2d_fm_eval(const Salem2dFm *handle, double x, double y, double *value);

/**
 * Fourier coefficient at `ℓ = re + i·im`.
 *
 * # Safety
 * `handle` must be live; `out_re` and `out_im` must be writable.
 */
Salem2dStatus salem2d_fm_coeff(const Salem2dFm *handle,
                               int64_t re,
                               int64_t im,
                               double *out_re,
                               double *out_im);

/**
 * Number of `q` in the annulus, or 0 for NULL.
 *
 * # Safety
 * `handle` is NULL or live.
 */
size_t salem2d_fm_annulus_size(const Salem2dFm *handle);

/**
 * Parse a JSON measure spec and build its coefficient boxes.
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string; `handle` must be writable.
 * Release the result with [`salem2d_measure_free`].
 */
Salem2dStatus salem2d_measure_from_json(const char *json, Salem2dMeasure **handle);

/**
 * # Safety
 * `handle` is NULL or came from [`salem2d_measure_from_json`] and was not freed.
 */
void salem2d_measure_free(Salem2dMeasure *handle);

/**
 * Number of stages.
 *
 * # Safety
 * `handle` is NULL or live.
 */
size_t salem2d_measure_depth(const Salem2dMeasure *handle);

/**
 * # Safety
 * `handle` must be live; `value` must be writable.
 */
Salem2dStatus salem2d_measure_density(const Salem2dMeasure *handle,
                                      double x,
                                      double y,
                                      double *value);

/**
 * Transform of stage `k` at `ξ` with its error bound. `error` may be NULL.
 *
 * # Safety
 * `handle` must be live; `out_re` and `out_im` must be writable.
 */
Salem2dStatus salem2d_measure_stage_transform(const Salem2dMeasure *handle,
                                              size_t k,
                                              double xi_x,
                                              double xi_y,
                                              double *out_re,
                                              double *out_im,
                                              double *error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SALEM2D_H */
