#ifndef GLRT_H
#define GLRT_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Detector selector for [`glrt_estimate_rate`].
 */
#define GLRT_DETECTOR_POST_GLRT 0

#define GLRT_DETECTOR_PRE_GLRT 1

#define GLRT_DETECTOR_SQUARE_LAW 2

#define GLRT_DETECTOR_LRT 3

/*
 Outcome of a call.
 */
typedef enum GlrtStatus {
  GLRT_STATUS_OK = 0,
  GLRT_STATUS_NULL_POINTER = 1,
  GLRT_STATUS_DOMAIN = 2,
  GLRT_STATUS_POLE = 3,
  GLRT_STATUS_NON_CONVERGENCE = 4,
  GLRT_STATUS_INFEASIBLE_CONTOUR = 5,
  GLRT_STATUS_IMAGINARY_RESIDUE = 6,
  GLRT_STATUS_DEGENERATE_SAMPLE = 7,
  GLRT_STATUS_BRACKET = 8,
  GLRT_STATUS_INSUFFICIENT_TRIALS = 9,
  GLRT_STATUS_CONFIG = 10,
  GLRT_STATUS_IO = 11,
  GLRT_STATUS_PANIC = 12,
} GlrtStatus;

/*
 Opaque simulation scenario.
 */
typedef struct GlrtScenario GlrtScenario;

/*
 Residue-series result.
 */
typedef struct GlrtSeriesReport {
  double pd;
  uint64_t terms_used;
  /*
   Certified bound on the neglected tail.
   */
  double bound_at_stop;
  double elapsed_seconds;
} GlrtSeriesReport;

/*
 Monte-Carlo rate estimate with its 95% Wilson interval.
 */
typedef struct GlrtTrialReport {
  uint64_t trials;
  uint64_t detections;
  double rate;
  double ci_low;
  double ci_high;
  /*
   Trials with an undefined statistic, counted as non-detections.
   */
  uint64_t degenerate;
} GlrtTrialReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *glrt_last_error_message(void);

/*
 Static name of a status code; unknown codes give "unknown".
 */
const char *glrt_status_name(int32_t status);

/*
 Threshold on Z that yields `pfa` with `m` samples.
 */
enum GlrtStatus glrt_threshold_for_pfa(double pfa, uint32_t m, double *out);

/*
 False-alarm probability of threshold `gamma`.
 */
enum GlrtStatus glrt_pfa(double gamma, uint32_t m, double *out);

/*
 Density of Z under H0.
 */
enum GlrtStatus glrt_pdf_h0(double z, uint32_t m, double *out);

/*
 Density of Z under H1 with aggregate SNR `upsilon` (linear).
 */
enum GlrtStatus glrt_pdf_h1(double z, uint32_t m, double upsilon, double *out);

/*
 Detection probability by adaptive quadrature.
 */
enum GlrtStatus glrt_pd_quadrature(uint32_t m, double pfa, double upsilon, double tol, double *out);

/*
 Detection probability by the residue series, stopped once the tail bound is below `tol`.
 */
enum GlrtStatus glrt_pd_series(uint32_t m,
                               double pfa,
                               double upsilon,
                               double tol,
                               struct GlrtSeriesReport *out);

/*
 Detection probability from the bivariate Fox H-function.
 */
enum GlrtStatus glrt_pd_foxh(uint32_t m, double pfa, double upsilon, double tol, double *out);

/*
 Bound on the series tail beyond `t0` terms at an operating point.
 */
enum GlrtStatus glrt_truncation_bound(uint32_t m,
                                      double pfa,
                                      double upsilon,
                                      uint64_t t0,
                                      double *out);

/*
 Scenario with `n` antennas sharing the per-antenna SNR `snr_db`.
 */
enum GlrtStatus glrt_scenario_new_equal_snr(uint32_t n,
                                            uint32_t m,
                                            double snr_db,
                                            double sigma_sq,
                                            uint64_t seed,
                                            struct GlrtScenario **out);

/*
 Scenario with explicit per-antenna echo means `mu_x[i] + j mu_y[i]`, `i < n`.
 */
enum GlrtStatus glrt_scenario_new(uint32_t m,
                                  const double *mu_x,
                                  const double *mu_y,
                                  size_t n,
                                  double sigma_sq,
                                  uint64_t seed,
                                  struct GlrtScenario **out);

/*
 Releases a scenario; null is ignored.
 */
void glrt_scenario_free(struct GlrtScenario *sc);

/*
 Aggregate SNR `Υ` of a scenario.
 */
enum GlrtStatus glrt_scenario_upsilon(const struct GlrtScenario *sc, double *out);

/*
 Simulated detection rate of a detector at its analytic threshold for `pfa`.
 */
enum GlrtStatus glrt_estimate_rate(const struct GlrtScenario *sc,
                                   uint32_t detector,
                                   double pfa,
                                   uint64_t trials,
                                   struct GlrtTrialReport *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLRT_H */
