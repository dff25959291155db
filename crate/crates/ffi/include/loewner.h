#ifndef LOEWNER_H
#define LOEWNER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LoewnerStatus {
  LOEWNER_STATUS_OK = 0,
  LOEWNER_STATUS_NULL_POINTER = 1,
  LOEWNER_STATUS_INVALID_ARGUMENT = 2,
  LOEWNER_STATUS_PARSE = 3,
  // Input outside the domain of the operation: non-normalized field,
  // point outside the ball, singular linear part.
  LOEWNER_STATUS_DOMAIN = 4,
  // ODE step underflow, quadrature failure or inconsistent flow routes.
  LOEWNER_STATUS_NUMERICAL = 5,
  LOEWNER_STATUS_INVALID_UTF8 = 6,
  LOEWNER_STATUS_PANIC = 7,
} LoewnerStatus;

// Time-independent Herglotz field.
typedef struct LoewnerField LoewnerField;

// Truncated power series map on `C²`.
typedef struct LoewnerSeries LoewnerSeries;

typedef struct LoewnerSamplingConfig {
  uint32_t grid_radii;
  uint32_t grid_angles;
  uint64_t random_samples;
  uint64_t rng_seed;
  double defect_tolerance;
} LoewnerSamplingConfig;

typedef struct LoewnerComplex {
  double re;
  double im;
} LoewnerComplex;

typedef struct LoewnerPoint {
  struct LoewnerComplex z1;
  struct LoewnerComplex z2;
} LoewnerPoint;

// `(λ z₁ + A z₂², μ z₂)`.
typedef struct LoewnerShear {
  struct LoewnerComplex lambda;
  struct LoewnerComplex mu;
  struct LoewnerComplex a;
} LoewnerShear;

// `extremum` is the largest defect for membership checks and the smallest
// margin for starlikeness checks.
typedef struct LoewnerReport {
  bool accepted;
  double extremum;
  struct LoewnerPoint witness;
  uint64_t samples_used;
} LoewnerReport;

typedef struct LoewnerBound {
  double value;
  double direction_x;
  double direction_y;
} LoewnerBound;

// `q(t) = value` from `t_start` until the next segment starts.
typedef struct LoewnerQSegment {
  double t_start;
  struct LoewnerComplex value;
} LoewnerQSegment;

typedef struct LoewnerFlow {
  struct LoewnerComplex a_st;
  struct LoewnerComplex a_ode;
  double envelope;
} LoewnerFlow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next failing call on the same thread.
const char *loewner_last_error_message(void);

// # Safety
// `s` must be null or a string returned by this library.
void loewner_string_free(char *s);

struct LoewnerSamplingConfig loewner_sampling_config_default(void);

// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum LoewnerStatus loewner_series_from_json(const char *json, struct LoewnerSeries **out);

// # Safety
// `series` must be a live handle; `out` must be writable. The string is
// released with `loewner_string_free`.
enum LoewnerStatus loewner_series_to_json(const struct LoewnerSeries *series, char **out);

// # Safety
// `series` must be null or a handle not freed before.
void loewner_series_free(struct LoewnerSeries *series);

// The shear `(z₁ + a z₂², z₂)` truncated at `trunc_degree ≥ 2`.
//
// # Safety
// `out` must be writable.
enum LoewnerStatus loewner_series_phi(struct LoewnerComplex a,
                                      uint32_t trunc_degree,
                                      struct LoewnerSeries **out);

// The field `(−z₁ + a z₂², −z₂)` truncated at `trunc_degree ≥ 2`.
//
// # Safety
// `out` must be writable.
enum LoewnerStatus loewner_series_shear_field(struct LoewnerComplex a,
                                              uint32_t trunc_degree,
                                              struct LoewnerSeries **out);

// # Safety
// `series` must be a live handle; `out` must be writable.
enum LoewnerStatus loewner_series_eval(const struct LoewnerSeries *series,
                                       struct LoewnerPoint z,
                                       struct LoewnerPoint *out);

// Coefficient of `z₁^a1 z₂^a2` in component 1 or 2.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum LoewnerStatus loewner_series_coefficient(const struct LoewnerSeries *series,
                                              uint32_t component,
                                              uint32_t a1,
                                              uint32_t a2,
                                              struct LoewnerComplex *out);

// `outer ∘ inner`, truncated at the smaller degree.
//
// # Safety
// Both handles must be live; `out` must be writable.
enum LoewnerStatus loewner_series_compose(const struct LoewnerSeries *outer,
                                          const struct LoewnerSeries *inner,
                                          struct LoewnerSeries **out);

// # Safety
// `series` must be a live handle; `out` must be writable.
enum LoewnerStatus loewner_shear_of(const struct LoewnerSeries *series, struct LoewnerShear *out);

// Samples `Re⟨H(z), z⟩ ≤ 0`. A null `config` uses the defaults.
//
// # Safety
// `field` must be a live handle, `config` null or valid, `out` writable.
enum LoewnerStatus loewner_check_mminus(const struct LoewnerSeries *field,
                                        const struct LoewnerSamplingConfig *config,
                                        struct LoewnerReport *out);

// Samples the starlikeness margin of a map. A null `config` uses the
// defaults.
//
// # Safety
// `map` must be a live handle, `config` null or valid, `out` writable.
enum LoewnerStatus loewner_check_starlike(const struct LoewnerSeries *map,
                                          const struct LoewnerSamplingConfig *config,
                                          struct LoewnerReport *out);

// # Safety
// `out` must be writable.
enum LoewnerStatus loewner_sharp_bound(struct LoewnerBound *out);

// Wraps a normalized field `H` (`H(0) = 0`, `dH₀ = −id`) as a constant
// Herglotz field. The series handle stays owned by the caller.
//
// # Safety
// `series` must be a live handle; `out` must be writable.
enum LoewnerStatus loewner_field_constant(const struct LoewnerSeries *series,
                                          struct LoewnerField **out);

// # Safety
// `field` must be null or a handle not freed before.
void loewner_field_free(struct LoewnerField *field);

// Transition map `φ_{s,t}(z)` for `0 ≤ s ≤ t`.
//
// # Safety
// `field` must be a live handle; `out` must be writable.
enum LoewnerStatus loewner_integrate_transition(const struct LoewnerField *field,
                                                double s,
                                                double t,
                                                struct LoewnerPoint z,
                                                double tol,
                                                struct LoewnerPoint *out);

// Chain map `f_s ≈ e^T φ_{s,T}` fitted up to `stencil_degree`.
//
// # Safety
// `field` must be a live handle; `out` must be writable.
enum LoewnerStatus loewner_recover_chain_map(const struct LoewnerField *field,
                                             double s,
                                             double horizon,
                                             uint32_t stencil_degree,
                                             double tol,
                                             struct LoewnerSeries **out);

// Shear coefficient `a(s,t)` for a piecewise-constant `q`.
//
// # Safety
// `segments` must point to `len` readable segments; `out` must be writable.
enum LoewnerStatus loewner_shear_coefficient_flow(const struct LoewnerQSegment *segments,
                                                  uintptr_t len,
                                                  double s,
                                                  double t,
                                                  struct LoewnerFlow *out);

// Runs the end-to-end checks for the shear coefficient `a` and writes the
// report as JSON. `all_passed` is set from the report.
//
// # Safety
// `config` null or valid; `all_passed` null or writable; `out` writable.
enum LoewnerStatus loewner_reproduce(struct LoewnerComplex a,
                                     const struct LoewnerSamplingConfig *config,
                                     bool *all_passed,
                                     char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOEWNER_H */
