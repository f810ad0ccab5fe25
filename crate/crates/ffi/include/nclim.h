#ifndef NCLIM_H
#define NCLIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NclimStatus {
  NCLIM_STATUS_OK = 0,
  NCLIM_STATUS_NULL_POINTER = 1,
  NCLIM_STATUS_INVALID_INPUT = 2,
  NCLIM_STATUS_DIVERGED = 3,
  NCLIM_STATUS_NUMERICAL = 4,
  NCLIM_STATUS_PANIC = 5,
} NclimStatus;

/**
 * A validated scenario.
 */
typedef struct NclimScenario NclimScenario;

/**
 * Closed-form limit split into its reference and network parts.
 */
typedef struct NclimLimit {
  double j1;
  double j2;
  double total;
} NclimLimit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *nclim_version(void);

/**
 * Message of the last failure on this thread; empty if none. Valid until the next call.
 */
const char *nclim_last_error(void);

/**
 * Parses and validates a JSON scenario.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum NclimStatus nclim_scenario_from_json(const char *json, struct NclimScenario **out);

/**
 * Builds a figure preset's base scenario.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum NclimStatus nclim_scenario_from_preset(const char *name, struct NclimScenario **out);

/**
 * Releases a scenario; null is ignored.
 *
 * # Safety
 * `scenario` must come from this library and not be used afterwards.
 */
void nclim_scenario_free(struct NclimScenario *scenario);

/**
 * Number of plant outputs (channels).
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum NclimStatus nclim_scenario_outputs(const struct NclimScenario *scenario, size_t *out);

/**
 * Closed-form limit.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum NclimStatus nclim_limit(const struct NclimScenario *scenario, struct NclimLimit *out);

/**
 * Numerical optimum over a Youla basis of `basis_degree` terms on `grid_points` frequencies.
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum NclimStatus nclim_oracle(const struct NclimScenario *scenario,
                              size_t basis_degree,
                              size_t grid_points,
                              double *out);

/**
 * Runs a preset sweep and returns its CSV; free it with [`nclim_string_free`].
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` must be writable.
 */
enum NclimStatus nclim_sweep_preset_csv(const char *name, char **out);

/**
 * Scenario as JSON with defaults filled in; free it with [`nclim_string_free`].
 *
 * # Safety
 * `scenario` must be a live handle; `out` must be writable.
 */
enum NclimStatus nclim_scenario_to_json(const struct NclimScenario *scenario, char **out);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void nclim_string_free(char *s);

/**
 * Runs the invariant suites; `passed` receives 1 when all pass.
 *
 * # Safety
 * `passed` must be writable.
 */
enum NclimStatus nclim_check(int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCLIM_H */
