#ifndef DPCI_H
#define DPCI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>

typedef enum DpciStatus {
  DPCI_STATUS_OK = 0,
  DPCI_STATUS_NULL_POINTER = 1,
  DPCI_STATUS_EMPTY = 2,
  DPCI_STATUS_TOO_FEW_OBSERVATIONS = 3,
  DPCI_STATUS_NON_FINITE = 4,
  DPCI_STATUS_INVALID_BOUNDS = 5,
  DPCI_STATUS_INVALID_PARAMETER = 6,
  DPCI_STATUS_RANK_OUT_OF_RANGE = 7,
  DPCI_STATUS_OUTSIDE_BOUNDS = 8,
  DPCI_STATUS_NOT_APPLICABLE = 9,
  DPCI_STATUS_UNKNOWN_METHOD = 10,
  DPCI_STATUS_PANIC = 11,
} DpciStatus;

// Method identifiers, matching `Method::code`.
typedef enum DpciMethod {
  DPCI_METHOD_PUBLIC = 0,
  DPCI_METHOD_NOISY_VAR = 1,
  DPCI_METHOD_NOISY_MAD = 2,
  DPCI_METHOD_CEN_Q = 3,
  DPCI_METHOD_SYM_Q = 4,
  DPCI_METHOD_MOD = 5,
  DPCI_METHOD_VADHAN = 6,
  DPCI_METHOD_ORA = 7,
} DpciMethod;

// A private estimator bound to a method, budget, tuning and clamp window.
typedef struct DpciEstimator DpciEstimator;

// Seeded random state.
typedef struct DpciRng DpciRng;

// Budget split and spread quantile.
typedef struct DpciParams {
  double rho;
  double b;
} DpciParams;

typedef struct DpciInterval {
  double lower;
  double upper;
  double moe;
  double center;
  // NaN when the method reports no spread.
  double spread;
  double alpha;
  size_t nsim;
} DpciInterval;

typedef struct DpciEstimate {
  double center;
  double spread;
  // Non-zero when the spread was floored or forced to zero.
  uint8_t degenerate;
} DpciEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *dpci_version(void);

// Message for the most recent failure on this thread; empty after a
// success. Valid until the next `dpci_` call on the same thread.
const char *dpci_last_error(void);

struct DpciRng *dpci_rng_new(uint64_t seed);

// Releases a handle from [`dpci_rng_new`]. Null is ignored.
void dpci_rng_free(struct DpciRng *rng);

// Standard normal quantile.
enum DpciStatus dpci_qz(double p, double *result);

// Student t quantile with `df` degrees of freedom.
enum DpciStatus dpci_qt(double p, uint64_t df, double *result);

// Tuned defaults for `method`.
enum DpciStatus dpci_default_params(uint32_t method, struct DpciParams *result);

// Non-private t interval.
enum DpciStatus dpci_public_ci(const double *data,
                               size_t len,
                               double alpha,
                               struct DpciInterval *result);

// Configure a simulated-interval method. `params` may be null for the
// method's defaults. Returns null on failure; see [`dpci_last_error`].
struct DpciEstimator *dpci_estimator_new(uint32_t method,
                                         double epsilon,
                                         const struct DpciParams *params,
                                         double xmin,
                                         double xmax);

// Releases a handle from [`dpci_estimator_new`]. Null is ignored.
void dpci_estimator_free(struct DpciEstimator *est);

// One private center/spread estimate. The data are clamped to the
// estimator's window first.
enum DpciStatus dpci_estimator_estimate(const struct DpciEstimator *est,
                                        const double *data,
                                        size_t len,
                                        struct DpciRng *rng,
                                        struct DpciEstimate *result);

// Simulation-based interval. The data are clamped to the estimator's
// window first; `seed` fixes all randomness.
enum DpciStatus dpci_estimator_sim_ci(const struct DpciEstimator *est,
                                      const double *data,
                                      size_t len,
                                      double alpha,
                                      size_t nsim,
                                      uint64_t seed,
                                      struct DpciInterval *result);

// Private estimate of the rank-`rank` (1-based) order statistic. The data
// must already lie inside `[xmin, xmax]`.
enum DpciStatus dpci_expq(const double *data,
                          size_t len,
                          size_t rank,
                          double epsilon,
                          double xmin,
                          double xmax,
                          struct DpciRng *rng,
                          double *result);

// Exact output density of [`dpci_expq`] at `y`.
enum DpciStatus dpci_expq_density(const double *data,
                                  size_t len,
                                  size_t rank,
                                  double epsilon,
                                  double xmin,
                                  double xmax,
                                  double y,
                                  double *result);

// Exact expected output of [`dpci_expq`].
enum DpciStatus dpci_expq_expected_value(const double *data,
                                         size_t len,
                                         size_t rank,
                                         double epsilon,
                                         double xmin,
                                         double xmax,
                                         double *result);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DPCI_H */
