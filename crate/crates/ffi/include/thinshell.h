#ifndef THINSHELL_H
#define THINSHELL_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_NULL_POINTER = 1,
  TS_STATUS_INVALID_ARGUMENT = 2,
  TS_STATUS_DIMENSION_MISMATCH = 3,
  TS_STATUS_INVALID_BODY = 4,
  TS_STATUS_UNSUPPORTED_KIND = 5,
  TS_STATUS_NUMERICAL = 6,
  TS_STATUS_IO = 7,
  TS_STATUS_PANIC = 8,
} TsStatus;

/**
 * Opaque body description.
 */
typedef struct TsBody TsBody;

/**
 * Opaque row-major sample matrix.
 */
typedef struct TsSamples TsSamples;

typedef struct TsThinShellStats {
  double var_ratio;
  double var_ratio_half_width;
  double shell_dev;
  double shell_dev_half_width;
} TsThinShellStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call into this library on the same thread.
 */
const char *ts_last_error_message(void);

/**
 * Static, NUL-terminated version string.
 */
const char *ts_version(void);

/**
 * Cube `[-half_width, half_width]^dim`.
 */
enum TsStatus ts_body_cube(size_t dim, double half_width, struct TsBody **out);

enum TsStatus ts_body_euclidean_ball(size_t dim, double radius, struct TsBody **out);

/**
 * `l_p` ball; `p = INFINITY` gives the cube.
 */
enum TsStatus ts_body_lp_ball(size_t dim, double p, double radius, struct TsBody **out);

/**
 * The non-convex axis cross model.
 */
enum TsStatus ts_body_counterexample_cross(size_t dim, struct TsBody **out);

/**
 * Replace `*body` by its isotropic rescaling.
 *
 * # Safety
 * `body` must be a live handle.
 */
enum TsStatus ts_body_make_isotropic(struct TsBody *body);

/**
 * # Safety
 * `body` must be a live handle and `x` valid for `len` reads.
 */
enum TsStatus ts_body_contains(const struct TsBody *body, const double *x, size_t len, bool *out);

/**
 * # Safety
 * `body` must be null or a handle from this library not yet freed.
 */
void ts_body_free(struct TsBody *body);

/**
 * `count` exact draws (the axis cross uses its direct sampler).
 *
 * # Safety
 * `body` must be a live handle.
 */
enum TsStatus ts_sample(const struct TsBody *body,
                        size_t count,
                        uint64_t seed,
                        struct TsSamples **out);

/**
 * # Safety
 * `samples` must be a live handle.
 */
size_t ts_samples_rows(const struct TsSamples *samples);

/**
 * # Safety
 * `samples` must be a live handle.
 */
size_t ts_samples_dim(const struct TsSamples *samples);

/**
 * Borrowed pointer to the `rows * dim` row-major values; valid while the handle lives.
 *
 * # Safety
 * `samples` must be a live handle.
 */
const double *ts_samples_data(const struct TsSamples *samples);

/**
 * # Safety
 * `samples` must be null or a handle from this library not yet freed.
 */
void ts_samples_free(struct TsSamples *samples);

/**
 * `Var(|X|²/n)` and `E(|X| - √n)²` with 3-sigma half-widths; needs 100 rows.
 *
 * # Safety
 * `samples` must be a live handle.
 */
enum TsStatus ts_thin_shell_stats(const struct TsSamples *samples, struct TsThinShellStats *out);

/**
 * Characteristic function of the smoothing kernel.
 */
double ts_kernel_char_fn(double xi);

double ts_kernel_density(double x);

double ts_kernel_cdf(double x);

/**
 * Writes `(EΓ², EΓ⁴, EΓ⁶)` to `out[0..3]`.
 *
 * # Safety
 * `out` must be valid for 3 writes.
 */
enum TsStatus ts_kernel_moments(double *out);

/**
 * `P(σΓ + Σθ_iΔ_i >= t)`; `brute_force` selects the `2ⁿ` enumeration.
 *
 * # Safety
 * `theta` must be valid for `n` reads.
 */
enum TsStatus ts_bernoulli_gamma_tail(const double *theta,
                                      size_t n,
                                      double sigma,
                                      double t,
                                      bool brute_force,
                                      double *out);

/**
 * Kolmogorov distance of `values` to the standard normal and its DKW band.
 *
 * # Safety
 * `values` must be valid for `len` reads.
 */
enum TsStatus ts_kolmogorov_normal(const double *values,
                                   size_t len,
                                   double *distance,
                                   double *dkw_band);

/**
 * Both sides of the two power-function identities, in order
 * `(deviation_lhs, deviation_rhs, range_lhs, range_rhs)`.
 *
 * # Safety
 * `out` must be valid for 4 writes.
 */
enum TsStatus ts_identities(double a, double p, double r, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* THINSHELL_H */
