#ifndef FPOPT_H
#define FPOPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum FpoptStatus {
  FPOPT_STATUS_OK = 0,
  FPOPT_STATUS_NULL_ARGUMENT = 1,
  FPOPT_STATUS_INVALID_UTF8 = 2,
  FPOPT_STATUS_PARSE_ERROR = 3,
  FPOPT_STATUS_INVALID_PLAN = 4,
  FPOPT_STATUS_INVALID_ARGUMENT = 5,
  FPOPT_STATUS_IO_ERROR = 6,
  FPOPT_STATUS_EVALUATION_FAILED = 7,
  FPOPT_STATUS_BUFFER_TOO_SMALL = 8,
  FPOPT_STATUS_PANIC = 9,
} FpoptStatus;

/**
 * Opaque floor plan.
 */
typedef struct FpoptPlan FpoptPlan;

/**
 * Opaque hourly weather year.
 */
typedef struct FpoptWeather FpoptWeather;

/**
 * Cost settings passed by value.
 */
typedef struct FpoptCostConfig {
  /**
   * Underheating weight.
   */
  double w1;
  /**
   * Overheating weight.
   */
  double w2;
} FpoptCostConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *fpopt_version(void);

/**
 * Message describing the last failure on this thread. Valid until the next
 * call on the same thread; empty after a successful call.
 */
const char *fpopt_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void fpopt_string_free(char *s);

/**
 * Parses and validates a plan from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum FpoptStatus fpopt_plan_from_json(const char *json, struct FpoptPlan **out);

/**
 * Generates a synthetic three-bedroom plan from `seed`.
 *
 * # Safety
 * `out` must be writable.
 */
enum FpoptStatus fpopt_plan_generate(uint64_t seed, struct FpoptPlan **out);

/**
 * Serializes a plan to pretty JSON. Release the result with
 * [`fpopt_string_free`].
 *
 * # Safety
 * `plan` must be a live handle; `out` must be writable.
 */
enum FpoptStatus fpopt_plan_to_json(const struct FpoptPlan *plan, char **out);

/**
 * Current orientation of a plan, degrees. NaN for a null handle.
 *
 * # Safety
 * `plan` must be null or a live handle.
 */
double fpopt_plan_orientation(const struct FpoptPlan *plan);

/**
 * Releases a plan. Null is ignored.
 *
 * # Safety
 * `plan` must be null or a handle from this library not yet freed.
 */
void fpopt_plan_free(struct FpoptPlan *plan);

/**
 * Loads a weather CSV file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum FpoptStatus fpopt_weather_load(const char *path, struct FpoptWeather **out);

/**
 * Builds the synthetic weather year for a site.
 *
 * # Safety
 * `out` must be writable.
 */
enum FpoptStatus fpopt_weather_synthetic(double latitude,
                                         double longitude,
                                         struct FpoptWeather **out);

/**
 * Releases a weather year. Null is ignored.
 *
 * # Safety
 * `weather` must be null or a handle from this library not yet freed.
 */
void fpopt_weather_free(struct FpoptWeather *weather);

/**
 * Discomfort penalty of `plan`, degree-hours, with the default comfort model.
 *
 * # Safety
 * Handles must be live; `out` must be writable.
 */
enum FpoptStatus fpopt_evaluate_penalty(const struct FpoptPlan *plan,
                                        const struct FpoptWeather *weather,
                                        struct FpoptCostConfig cost,
                                        double *out);

/**
 * Fills `penalties[k]` with the penalty at `k · resolution` degrees.
 * `len` must be at least `360 / resolution`; `written` receives the count.
 *
 * # Safety
 * Handles must be live; `penalties` must hold `len` doubles.
 */
enum FpoptStatus fpopt_orientation_curve(const struct FpoptPlan *plan,
                                         const struct FpoptWeather *weather,
                                         struct FpoptCostConfig cost,
                                         uint32_t resolution,
                                         double *penalties,
                                         size_t len,
                                         size_t *written);

/**
 * Runs the full operator pipeline with default descent settings. On success
 * `out_plan` receives the optimized plan and `out_report` its JSON report.
 *
 * # Safety
 * Handles must be live; out-parameters must be writable.
 */
enum FpoptStatus fpopt_optimize(const struct FpoptPlan *plan,
                                const struct FpoptWeather *weather,
                                struct FpoptCostConfig cost,
                                struct FpoptPlan **out_plan,
                                char **out_report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPOPT_H */
