#ifndef POPLABEL_H
#define POPLABEL_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_POINTER = 1,
  PL_STATUS_INVALID_UTF8 = 2,
  PL_STATUS_UNKNOWN_PROTOCOL = 3,
  PL_STATUS_INVALID_PARAMETER = 4,
  /**
   * Malformed JSON input.
   */
  PL_STATUS_PARSE = 5,
  PL_STATUS_IO = 6,
  /**
   * The requested value does not exist, such as an unlabeled agent.
   */
  PL_STATUS_NOT_FOUND = 7,
  PL_STATUS_PANIC = 8,
} PlStatus;

typedef enum PlLeaderMode {
  PL_LEADER_MODE_ORACLE = 0,
  PL_LEADER_MODE_ELECTED = 1,
} PlLeaderMode;

/**
 * Protocol configuration handle.
 */
typedef struct PlConfig PlConfig;

/**
 * Finished run handle.
 */
typedef struct PlRecord PlRecord;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread; do not free.
 */
const char *pl_last_error(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pl_string_free(char *s);

/**
 * Number of registered protocols.
 */
size_t pl_protocol_count(void);

/**
 * Name of protocol `index`, or null when out of range. Static; do not free.
 */
const char *pl_protocol_name(size_t index);

/**
 * Creates a configuration for `protocol` over `n` agents with the oracle
 * leader and default parameters.
 *
 * # Safety
 * `protocol` must be a NUL-terminated string; `out` must be writable.
 */
enum PlStatus pl_config_new(const char *protocol, size_t n, struct PlConfig **out);

/**
 * # Safety
 * `cfg` must come from [`pl_config_new`] and not have been freed, or be null.
 */
void pl_config_free(struct PlConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum PlStatus pl_config_set_epsilon(struct PlConfig *cfg, double epsilon);

/**
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum PlStatus pl_config_set_k(struct PlConfig *cfg, size_t k);

/**
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum PlStatus pl_config_set_c_phase(struct PlConfig *cfg, double c_phase);

/**
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum PlStatus pl_config_set_leader(struct PlConfig *cfg, enum PlLeaderMode mode);

/**
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum PlStatus pl_config_set_generalized(struct PlConfig *cfg, bool on);

/**
 * Checks the configuration without running it.
 *
 * # Safety
 * `cfg` must be a live configuration handle.
 */
enum PlStatus pl_config_validate(const struct PlConfig *cfg);

/**
 * Runs one simulation. `max_interactions = 0` uses the protocol's default
 * cap.
 *
 * # Safety
 * `cfg` must be a live configuration handle; `out` must be writable.
 */
enum PlStatus pl_run(const struct PlConfig *cfg,
                     uint64_t seed,
                     uint64_t max_interactions,
                     struct PlRecord **out);

/**
 * # Safety
 * `rec` must come from [`pl_run`] and not have been freed, or be null.
 */
void pl_record_free(struct PlRecord *rec);

/**
 * Population size; 0 for a null handle.
 *
 * # Safety
 * `rec` must be a live record handle or null.
 */
size_t pl_record_n(const struct PlRecord *rec);

/**
 * Stabilization time, or the cap for an unfinished run; 0 for null.
 *
 * # Safety
 * `rec` must be a live record handle or null.
 */
uint64_t pl_record_interactions(const struct PlRecord *rec);

/**
 * # Safety
 * `rec` must be a live record handle or null.
 */
bool pl_record_completed(const struct PlRecord *rec);

/**
 * # Safety
 * `rec` must be a live record handle or null.
 */
bool pl_record_valid(const struct PlRecord *rec);

/**
 * # Safety
 * `rec` must be a live record handle or null.
 */
bool pl_record_safe(const struct PlRecord *rec);

/**
 * Distinct states used during the run; 0 for null.
 *
 * # Safety
 * `rec` must be a live record handle or null.
 */
size_t pl_record_census(const struct PlRecord *rec);

/**
 * Final label of agent `agent`.
 *
 * # Safety
 * `rec` must be a live record handle; `out` must be writable.
 */
enum PlStatus pl_record_label(const struct PlRecord *rec, size_t agent, uint64_t *out);

/**
 * The whole record as JSON.
 *
 * # Safety
 * `rec` must be a live record handle; `out` must be writable.
 */
enum PlStatus pl_record_json(const struct PlRecord *rec, char **out);

/**
 * Runs the sweep described by `spec_json` and returns the report as JSON.
 * `jobs = 0` picks the default worker count.
 *
 * # Safety
 * `spec_json` must be a NUL-terminated string; `out` must be writable.
 */
enum PlStatus pl_sweep_json(const char *spec_json, size_t jobs, char **out);

/**
 * Expected-interaction lower bound for pool protocols with range
 * `[1, n + r]`.
 */
double pl_pool_bound(size_t n, uint64_t r);

/**
 * States needed by any silent, safe and valid protocol.
 */
double pl_state_lower_bound(size_t n);

/**
 * Interaction lower bound for a silent, safe protocol with `n + t` states;
 * NaN when `t >= n`.
 */
double pl_silent_safe_bound(size_t n, size_t t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POPLABEL_H */
