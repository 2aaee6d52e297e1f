#ifndef QLMASS_H
#define QLMASS_H

#include <stddef.h>
#include <stdint.h>

// Result codes.
typedef enum QlmStatus {
  QLM_STATUS_OK = 0,
  QLM_STATUS_NULL_POINTER = 1,
  QLM_STATUS_INVALID_ARGUMENT = 2,
  QLM_STATUS_INSIDE_EXCLUSION = 3,
  QLM_STATUS_NO_CONVERGENCE = 4,
  QLM_STATUS_GEOMETRY = 5,
  QLM_STATUS_CONFIG = 6,
  QLM_STATUS_PANIC = 7,
} QlmStatus;

// Opaque asymptotically flat metric.
typedef struct QlmMetric QlmMetric;

// Masses of one centered coordinate sphere.
typedef struct QlmMassRow {
  double r;
  double area;
  double hawking;
  // Valid only when `has_brown_york` is nonzero.
  double brown_york;
  int32_t has_brown_york;
  double adm_reference;
  // Negative when no embedding was produced.
  double embed_residual;
} QlmMassRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Parses a metric such as `"kerr_slice m=1 a=0.5"` into a new handle.
//
// # Safety
// `spec` must be a NUL-terminated string and `out` a valid pointer.
enum QlmStatus qlm_metric_new(const char *spec, struct QlmMetric **out);

// Releases a handle from [`qlm_metric_new`]; null is ignored.
//
// # Safety
// `metric` must come from [`qlm_metric_new`] and not be used afterwards.
void qlm_metric_free(struct QlmMetric *metric);

// Closed-form ADM mass of the metric's family.
//
// # Safety
// Pointers must be valid.
enum QlmStatus qlm_metric_known_adm_mass(const struct QlmMetric *metric, double *out);

// Row-major components `g_ij` at `x`.
//
// # Safety
// `x` must point to 3 doubles and `out` to 9.
enum QlmStatus qlm_metric_components(const struct QlmMetric *metric, const double *x, double *out);

// ADM flux through the coordinate sphere of radius `r`.
//
// # Safety
// Pointers must be valid.
enum QlmStatus qlm_adm_flux(const struct QlmMetric *metric,
                            double r,
                            size_t band_limit,
                            double *out);

// ADM mass extrapolated from fluxes at `n >= 3` increasing radii.
//
// # Safety
// `radii` must point to `n` doubles.
enum QlmStatus qlm_adm_mass(const struct QlmMetric *metric,
                            const double *radii,
                            size_t n,
                            size_t band_limit,
                            double *out);

// Hawking and Brown–York masses of the centered coordinate sphere `|x| = r`.
//
// # Safety
// Pointers must be valid.
enum QlmStatus qlm_mass_row(const struct QlmMetric *metric,
                            double r,
                            size_t band_limit,
                            struct QlmMassRow *out);

// Runs a mass study from key-value configuration text and returns its CSV
// report in `*out`, to be released with [`qlm_string_free`].
//
// # Safety
// `config` must be a NUL-terminated string and `out` a valid pointer.
enum QlmStatus qlm_masses_csv(const char *config, char **out);

// Releases a string returned by the library; null is ignored.
//
// # Safety
// `s` must come from this library and not be used afterwards.
void qlm_string_free(char *s);

// Description of the last failure on this thread; empty after success.
// The pointer stays valid until the next library call on the same thread.
const char *qlm_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QLMASS_H */
