#ifndef NETDECIDE_H
#define NETDECIDE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 2 to 4 match the command-line exit codes.
 */
typedef enum NdStatus {
  ND_STATUS_OK = 0,
  ND_STATUS_NULL_POINTER = 1,
  ND_STATUS_CONFIG = 2,
  ND_STATUS_NUMERICAL = 3,
  ND_STATUS_IO = 4,
  ND_STATUS_INVALID_UTF8 = 5,
  ND_STATUS_OUT_OF_RANGE = 6,
  ND_STATUS_PANIC = 7,
} NdStatus;

/**
 * Completed run handle.
 */
typedef struct NdResult NdResult;

/**
 * Scenario configuration handle.
 */
typedef struct NdScenario NdScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nd_version(void);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library from this thread.
 */
const char *nd_last_error(void);

/**
 * Builds a scenario from a named preset such as `"fig5"`.
 *
 * # Safety
 * `name` must be a NUL-terminated string and `out` a writable pointer.
 */
enum NdStatus nd_scenario_preset(const char *name, struct NdScenario **out);

/**
 * Builds a scenario from a JSON document. Missing fields take defaults.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum NdStatus nd_scenario_from_json(const char *json, struct NdScenario **out);

/**
 * Overrides seed, replica count and iteration count. Zero leaves the
 * replica or iteration count unchanged.
 *
 * # Safety
 * `scenario` must be a live handle.
 */
enum NdStatus nd_scenario_configure(struct NdScenario *scenario,
                                    uint64_t seed,
                                    size_t replicas,
                                    size_t iterations);

/**
 * # Safety
 * `scenario` must be null or a handle not yet freed.
 */
void nd_scenario_free(struct NdScenario *scenario);

/**
 * Runs a static or fish scenario.
 *
 * # Safety
 * `scenario` must be a live handle and `out` a writable pointer.
 */
enum NdStatus nd_run(const struct NdScenario *scenario, struct NdResult **out);

/**
 * Number of points in each MSD curve (iterations plus one).
 *
 * # Safety
 * `result` must be null or a live handle.
 */
size_t nd_result_len(const struct NdResult *result);

/**
 * Copies up to `capacity` points of the ensemble MSD curve for model `q`
 * (in dB) into `buffer` and stores the number written in `written`.
 *
 * # Safety
 * `buffer` must hold `capacity` doubles; `written` may be null.
 */
enum NdStatus nd_result_msd_db(const struct NdResult *result,
                               uint8_t q,
                               double *buffer,
                               size_t capacity,
                               size_t *written);

/**
 * Steady-state MSD (dB) toward the agreed and the rejected model.
 *
 * # Safety
 * Both output pointers must be writable.
 */
enum NdStatus nd_result_steady_state(const struct NdResult *result,
                                     double *agreed_db,
                                     double *rejected_db);

/**
 * Median iteration of lasting agreement across replicas. Writes infinity
 * when fewer than half of the replicas agreed.
 *
 * # Safety
 * `out` must be writable.
 */
enum NdStatus nd_result_median_agreement(const struct NdResult *result, double *out);

/**
 * Run summary as a JSON string owned by the caller; release it with
 * [`nd_string_free`].
 *
 * # Safety
 * `result` must be a live handle.
 */
char *nd_result_summary_json(const struct NdResult *result);

/**
 * # Safety
 * `result` must be null or a handle not yet freed.
 */
void nd_result_free(struct NdResult *result);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void nd_string_free(char *s);

/**
 * Quorum keep probability for `n_g` like-minded agents out of `n_k`.
 * Returns NaN for invalid arguments.
 */
double nd_quorum_prob(size_t n_g, size_t n_k, uint32_t k, double beta);

/**
 * Spectral radius of the transient block of the mean-field decision chain.
 *
 * # Safety
 * `out` must be writable.
 */
enum NdStatus nd_meanfield_rate(size_t agents, uint32_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETDECIDE_H */
