#ifndef POSIM_H
#define POSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
enum PosimStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : int32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  POSIM_STATUS_OK = 0,
  POSIM_STATUS_NULL_POINTER = -1,
  POSIM_STATUS_INVALID_ARGUMENT = -2,
  POSIM_STATUS_DOMAIN = -3,
  POSIM_STATUS_NUMERIC = -4,
  POSIM_STATUS_UNSUPPORTED = -5,
  POSIM_STATUS_BUFFER_TOO_SMALL = -6,
  POSIM_STATUS_PANIC = -99,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum PosimStatus PosimStatus;
#else
typedef int32_t PosimStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque posterior contour handle.
 */
typedef struct PosimContour PosimContour;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Posterior contour for one Cauchy location observation `y`.
 *
 * # Safety
 * `out` must be a valid pointer; release the handle with [`posim_contour_free`].
 */
PosimStatus posim_contour_cauchy(double y, struct PosimContour **out);

/**
 * Curved-normal posterior from the sample mean `y1` and standard deviation `y2`.
 * `exact_jacobian` nonzero selects the `n + 1` power in the conditional density.
 *
 * # Safety
 * `out` must be a valid pointer; release the handle with [`posim_contour_free`].
 */
PosimStatus posim_contour_curved_normal(uint32_t n,
                                        int32_t sign,
                                        int32_t exact_jacobian,
                                        double y1,
                                        double y2,
                                        struct PosimContour **out);

/**
 * Posterior for the ratio `φ` in the exponential errors-in-variables model.
 *
 * # Safety
 * `out` must be a valid pointer; release the handle with [`posim_contour_free`].
 */
PosimStatus posim_contour_eiv(double lambda1,
                              double lambda2,
                              double y1,
                              double y2,
                              struct PosimContour **out);

/**
 * Release a handle. Null is ignored.
 *
 * # Safety
 * `contour` must come from a `posim_contour_*` constructor and not be used afterwards.
 */
void posim_contour_free(struct PosimContour *contour);

/**
 * Contour value at `theta`; values outside the parameter space give `POSIM_STATUS_DOMAIN`.
 *
 * # Safety
 * `contour` must be a live handle and `out` a valid pointer.
 */
PosimStatus posim_contour_eval(const struct PosimContour *contour, double theta, double *out);

/**
 * Possibility of the closed interval `[lo, hi]` (infinite ends allowed).
 *
 * # Safety
 * `contour` must be a live handle and `out` a valid pointer.
 */
PosimStatus posim_contour_possibility(const struct PosimContour *contour,
                                      double lo,
                                      double hi,
                                      double *out);

/**
 * Necessity of the closed interval `[lo, hi]`.
 *
 * # Safety
 * `contour` must be a live handle and `out` a valid pointer.
 */
PosimStatus posim_contour_necessity(const struct PosimContour *contour,
                                    double lo,
                                    double hi,
                                    double *out);

/**
 * Plausibility region `{π > alpha}` as `(lower, upper)` pairs written to `bounds`.
 *
 * `capacity` counts pairs, so `bounds` must hold `2 * capacity` doubles.
 * `count` always receives the number of pairs; when it exceeds `capacity`
 * nothing is written and `POSIM_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `contour` must be a live handle, `count` a valid pointer, and `bounds`
 * valid for `2 * capacity` writes (may be null when `capacity` is 0).
 */
PosimStatus posim_contour_region(const struct PosimContour *contour,
                                 double alpha,
                                 double *bounds,
                                 size_t capacity,
                                 size_t *count);

/**
 * Asymmetric Laplace CDF with rate `r1` on the positive side and `r2` on the negative side.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
PosimStatus posim_asymmetric_laplace_cdf(double r1, double r2, double x, double *out);

/**
 * Whether the discrete probability `probs` lies in the credal set of the
 * possibility contour `contour_values` (both of length `len`).
 * `member` receives 1 or 0; `witness_alpha`, if not null, receives the
 * violated level (or -1 for members).
 *
 * # Safety
 * `probs` and `contour_values` must be valid for `len` reads, `member` a valid pointer.
 */
PosimStatus posim_credal_check(const double *probs,
                               const double *contour_values,
                               size_t len,
                               int32_t *member,
                               double *witness_alpha);

/**
 * Copy the calling thread's last error message into `buf` (NUL terminated,
 * truncated to `capacity`). Returns the full message length excluding the NUL;
 * 0 when there is no error.
 *
 * # Safety
 * `buf` must be valid for `capacity` writes, or null with `capacity` 0.
 */
size_t posim_last_error_message(char *buf, size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POSIM_H */
