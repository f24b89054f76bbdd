#ifndef WCRT_H
#define WCRT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WcrtKind {
  WCRT_KIND_READ = 0,
  WCRT_KIND_WRITE = 1,
} WcrtKind;

/**
 * Memory-subsystem case; `None` for every peripheral except main memories.
 */
typedef enum WcrtMemoryCase {
  WCRT_MEMORY_CASE_NONE = 0,
  WCRT_MEMORY_CASE_HIT = 1,
  WCRT_MEMORY_CASE_MISS_REFILL = 2,
  WCRT_MEMORY_CASE_MISS_REFILL_EVICT = 3,
} WcrtMemoryCase;

typedef enum WcrtStatus {
  WCRT_STATUS_OK = 0,
  WCRT_STATUS_NULL_POINTER = 1,
  WCRT_STATUS_INVALID_UTF8 = 2,
  /**
   * Malformed JSON or a schema mismatch.
   */
  WCRT_STATUS_PARSE = 3,
  /**
   * Well-formed input that breaks a model rule.
   */
  WCRT_STATUS_INVALID = 4,
  WCRT_STATUS_ANALYSIS = 5,
  WCRT_STATUS_SIMULATION = 6,
  /**
   * The simulation stopped at its horizon; partial results are returned.
   */
  WCRT_STATUS_HORIZON = 7,
  WCRT_STATUS_NOT_FOUND = 8,
  /**
   * A Rust panic was caught at the boundary.
   */
  WCRT_STATUS_INTERNAL = 9,
} WcrtStatus;

/**
 * A parsed topology.
 */
typedef struct WcrtTopology WcrtTopology;

/**
 * Statistics of one simulation run.
 */
typedef struct WcrtTrace WcrtTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread. Empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wcrt_last_error_message(void);

/**
 * Parses a topology document. Validation is separate: see [`wcrt_topology_validate`].
 *
 * # Safety
 * `json` is a NUL-terminated string; `out` is writable.
 */
enum WcrtStatus wcrt_topology_parse(const char *json, struct WcrtTopology **out);

/**
 * The bundled reference topology.
 *
 * # Safety
 * `out` is writable.
 */
enum WcrtStatus wcrt_topology_reference(struct WcrtTopology **out);

/**
 * Releases a topology. Null is ignored.
 *
 * # Safety
 * `t` is null or came from this library and was not freed before.
 */
void wcrt_topology_free(struct WcrtTopology *t);

/**
 * Counts validation errors and warnings. Returns `Invalid` when there are
 * errors; the message then lists them.
 *
 * # Safety
 * `t` is a live handle; the out pointers are null or writable.
 */
enum WcrtStatus wcrt_topology_validate(const struct WcrtTopology *t,
                                       uint32_t *errors,
                                       uint32_t *warnings);

/**
 * Isolation bound of one transaction, in picoseconds.
 *
 * # Safety
 * `t` is a live handle, strings are NUL-terminated, `out_ps` is writable.
 */
enum WcrtStatus wcrt_isolation_bound(const struct WcrtTopology *t,
                                     const char *controller,
                                     const char *peripheral,
                                     enum WcrtKind kind,
                                     uint32_t beta,
                                     enum WcrtMemoryCase memory_case,
                                     uint64_t *out_ps);

/**
 * Worst-case response time under interference, in picoseconds.
 * `interferer_beta` 0 means the same burst length as the analyzed one.
 *
 * # Safety
 * `t` is a live handle, strings are NUL-terminated, `out_ps` is writable.
 */
enum WcrtStatus wcrt_response_time_bound(const struct WcrtTopology *t,
                                         const char *controller,
                                         const char *peripheral,
                                         enum WcrtKind kind,
                                         uint32_t beta,
                                         enum WcrtMemoryCase memory_case,
                                         uint32_t v,
                                         uint32_t interferer_beta,
                                         uint64_t *out_ps);

/**
 * Runs a scenario document on `t`. `horizon_ps` 0 means no horizon. On
 * `Horizon` the partial trace is still returned through `out`.
 *
 * # Safety
 * `t` is a live handle, `scenario_json` is NUL-terminated, `out` is writable.
 */
enum WcrtStatus wcrt_simulate(const struct WcrtTopology *t,
                              const char *scenario_json,
                              uint64_t seed,
                              uint64_t horizon_ps,
                              struct WcrtTrace **out);

/**
 * Releases a trace. Null is ignored.
 *
 * # Safety
 * `t` is null or came from this library and was not freed before.
 */
void wcrt_trace_free(struct WcrtTrace *t);

/**
 * Number of completed transactions in the trace.
 *
 * # Safety
 * `t` is a live handle; `out` is writable.
 */
enum WcrtStatus wcrt_trace_len(const struct WcrtTrace *t, uint64_t *out);

/**
 * Hex SHA-256 of the exported trace. Owned by the trace handle.
 *
 * # Safety
 * `t` is null or a live handle.
 */
const char *wcrt_trace_hash(const struct WcrtTrace *t);

/**
 * Longest completed − issued over transactions of `kind` and `beta`.
 *
 * # Safety
 * `t` is a live handle; `out_ps` is writable.
 */
enum WcrtStatus wcrt_trace_max_service(const struct WcrtTrace *t,
                                       enum WcrtKind kind,
                                       uint32_t beta,
                                       uint64_t *out_ps);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WCRT_H */
