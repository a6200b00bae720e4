/* SPDX-License-Identifier: MIT OR Apache-2.0 */

#ifndef SERIALCORR_H
#define SERIALCORR_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Status codes returned by every fallible call.
 */
typedef enum ScStatus {
  SC_STATUS_OK = 0,
  SC_STATUS_NULL_POINTER = 1,
  SC_STATUS_INVALID_ARGUMENT = 2,
  SC_STATUS_DEGENERATE_INPUT = 3,
  SC_STATUS_FACTORIZATION_FAILURE = 4,
  SC_STATUS_QUADRATURE_FAILURE = 5,
  SC_STATUS_NO_ROOT = 6,
  SC_STATUS_SADDLE_FAILURE = 7,
  SC_STATUS_PARSE = 8,
  SC_STATUS_IO = 9,
  /*
   A Rust panic was caught at the boundary.
   */
  SC_STATUS_INTERNAL = 10,
} ScStatus;

typedef enum ScDistKind {
  SC_DIST_KIND_NORMAL = 0,
  /*
   Unit-variance Student t; `dof` must be at least 9.
   */
  SC_DIST_KIND_STUDENT_T = 1,
  SC_DIST_KIND_CENTERED_EXPONENTIAL = 2,
} ScDistKind;

typedef enum ScScheme {
  SC_SCHEME_UNCONDITIONAL = 0,
  SC_SCHEME_SMOOTHED = 1,
  SC_SCHEME_CONDITIONAL = 2,
} ScScheme;

/*
 A conditional CGF bound to the odd-indexed values of one series.
 */
typedef struct ScConditional ScConditional;

/*
 An observed or simulated series of odd length.
 */
typedef struct ScSeries ScSeries;

typedef struct ScDistribution {
  enum ScDistKind kind;
  /*
   Degrees of freedom, read only for `StudentT`.
   */
  uint32_t dof;
} ScDistribution;

/*
 Saddlepoint tail with its intermediate quantities. For an infeasible
 conditional threshold `feasible` is 0, `tail` is 0 and the rest are NaN.
 */
typedef struct ScSaddle {
  double u;
  double u0;
  double t_hat;
  double w;
  double psi;
  double w_plus;
  double tail;
  int32_t feasible;
  size_t m;
} ScSaddle;

/*
 Monte Carlo tail estimate.
 */
typedef struct ScTail {
  double probability;
  double std_error;
  uint64_t replicates;
  uint64_t seed;
} ScTail;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or null if it
 succeeded. The pointer stays valid until the next call on this thread.
 */
const char *serialcorr_last_error(void);

/*
 Library version as a static nul-terminated string.
 */
const char *serialcorr_version(void);

/*
 Copies `len` observations into a new series. `len` must be odd and at least 3.

 # Safety
 `x` must point to `len` readable doubles; `out` must be writable.
 */
enum ScStatus serialcorr_series_new(const double *x, size_t len, struct ScSeries **out);

/*
 Simulates a stationary AR(1) series of odd length `n`.

 # Safety
 `out` must be writable.
 */
enum ScStatus serialcorr_series_simulate(size_t n,
                                         double rho,
                                         struct ScDistribution dist,
                                         uint64_t seed,
                                         struct ScSeries **out);

/*
 # Safety
 `series` must be null or a handle from this library not yet freed.
 */
void serialcorr_series_free(struct ScSeries *series);

/*
 Number of observations, or 0 for a null handle.

 # Safety
 `series` must be null or a live handle.
 */
size_t serialcorr_series_len(const struct ScSeries *series);

/*
 Copies the observations into `buf`, which must hold `serialcorr_series_len` values.

 # Safety
 `series` must be a live handle; `buf` must have room for `cap` doubles.
 */
enum ScStatus serialcorr_series_values(const struct ScSeries *series, double *buf, size_t cap);

/*
 Lag-one serial correlation R of the series.

 # Safety
 `series` must be a live handle; `out` must be writable.
 */
enum ScStatus serialcorr_series_correlation(const struct ScSeries *series, double *out);

/*
 Gaussian unconditional saddlepoint P(R ≥ u) for length `n`.

 # Safety
 `out` must be writable.
 */
enum ScStatus serialcorr_unconditional_tail(size_t n, double rho, double u, struct ScSaddle *out);

/*
 Upper `level` critical value of the Gaussian unconditional saddlepoint.

 # Safety
 `out` must be writable.
 */
enum ScStatus serialcorr_unconditional_critical_value(size_t n,
                                                      double rho,
                                                      double level,
                                                      double *out);

/*
 Monte Carlo P(R > u) over `replicates` simulated series.

 # Safety
 `out` must be writable.
 */
enum ScStatus serialcorr_simulate_tail(size_t n,
                                       double rho,
                                       struct ScDistribution dist,
                                       double u,
                                       size_t replicates,
                                       uint64_t seed,
                                       struct ScTail *out);

/*
 Exact conditional CGF for normal errors, conditioning on the series' odd values.

 # Safety
 `series` must be a live handle; `out` must be writable.
 */
enum ScStatus serialcorr_conditional_gaussian(const struct ScSeries *series,
                                              double rho,
                                              struct ScConditional **out);

/*
 Conditional CGF by quadrature for a general error density.

 # Safety
 `series` must be a live handle; `out` must be writable.
 */
enum ScStatus serialcorr_conditional_general(const struct ScSeries *series,
                                             struct ScDistribution dist,
                                             double rho,
                                             struct ScConditional **out);

/*
 Conditional-bootstrap kernel mixture from the series' raw residuals at
 `rho0`. A non-positive `tau` selects the default 1/m.

 # Safety
 `series` must be a live handle; `out` must be writable.
 */
enum ScStatus serialcorr_conditional_bootstrap(const struct ScSeries *series,
                                               double rho0,
                                               double tau,
                                               struct ScConditional **out);

/*
 # Safety
 `cgf` must be null or a handle from this library not yet freed.
 */
void serialcorr_conditional_free(struct ScConditional *cgf);

/*
 Conditional saddlepoint P(R ≥ u | C).

 # Safety
 `cgf` must be a live handle; `out` must be writable.
 */
enum ScStatus serialcorr_conditional_tail(const struct ScConditional *cgf,
                                          double u,
                                          struct ScSaddle *out);

/*
 Upper `level` critical value of the conditional saddlepoint.

 # Safety
 `cgf` must be a live handle; `out` must be writable.
 */
enum ScStatus serialcorr_conditional_critical_value(const struct ScConditional *cgf,
                                                    double level,
                                                    double *out);

/*
 Bootstrap P*(R* > u) under `rho0`. `tau` is used by the smoothed and
 conditional schemes (non-positive selects 1/m); `n_cond` only by the
 smoothed scheme. For the conditional scheme the Monte Carlo estimate is
 returned; use [`serialcorr_conditional_bootstrap`] for its saddlepoint.

 # Safety
 `series` must be a live handle; `out` must be writable.
 */
enum ScStatus serialcorr_bootstrap_tail(const struct ScSeries *series,
                                        enum ScScheme scheme_kind,
                                        double rho0,
                                        double tau,
                                        double u,
                                        size_t replicates,
                                        size_t n_cond,
                                        uint64_t seed,
                                        struct ScTail *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SERIALCORR_H */
