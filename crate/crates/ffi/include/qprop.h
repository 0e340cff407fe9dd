#ifndef QPROP_H
#define QPROP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum {
  QP_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  QP_STATUS_NULL_POINTER = 1,
  /**
   * A string argument was not UTF-8.
   */
  QP_STATUS_INVALID_UTF8 = 2,
  /**
   * The scenario text was malformed or violated a structural rule.
   */
  QP_STATUS_PARSE_ERROR = 3,
  /**
   * An internal consistency check failed.
   */
  QP_STATUS_INVARIANT_VIOLATION = 4,
  /**
   * A configured enumeration or work bound would be exceeded.
   */
  QP_STATUS_BOUND_EXCEEDED = 5,
  /**
   * The command line or its arguments were invalid for this scenario.
   */
  QP_STATUS_USAGE = 6,
  /**
   * A panic or an unexpected condition.
   */
  QP_STATUS_INTERNAL = 7,
} QpStatus;

/**
 * A parsed scenario with its closed context family.
 */
typedef struct QpScenario QpScenario;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a scenario from TOML text.
 *
 * On success `*out` receives a new handle; free it with [`qp_scenario_free`].
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a writable pointer.
 */
QpStatus qp_scenario_parse(const char *toml, QpScenario **out);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `handle` must be null or a pointer from [`qp_scenario_parse`] not yet freed.
 */
void qp_scenario_free(QpScenario *handle);

/**
 * Hilbert-space dimension.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
QpStatus qp_scenario_dim(const QpScenario *handle, size_t *out);

/**
 * Number of contexts in the closed family, C1 included.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
QpStatus qp_family_size(const QpScenario *handle, size_t *out);

/**
 * Runs one CLI command (e.g. `"cps audit --family delta"`) on the scenario.
 *
 * `*out_text` receives the command's standard output, to be released with
 * [`qp_string_free`], and `*exit_code` the code the CLI would exit with. A
 * command that runs and reports a failed check returns `QP_STATUS_OK` with
 * exit code 1. On error `*out_text` is null and `*exit_code` is still set.
 *
 * # Safety
 * `handle` must be a live handle, `command` a NUL-terminated string, and
 * `out_text` and `exit_code` writable.
 */
QpStatus qp_run(const QpScenario *handle, const char *command, char **out_text, int32_t *exit_code);

/**
 * Exact CHSH value `num/den` for a scenario with a `[bell]` table.
 *
 * # Safety
 * `handle` must be a live handle; `num` and `den` writable.
 */
QpStatus qp_bell_chsh(const QpScenario *handle, int64_t *num, int64_t *den);

/**
 * Canonical TOML for the scenario, to be released with [`qp_string_free`].
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
QpStatus qp_scenario_to_toml(const QpScenario *handle, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must be null or a string from this library not yet freed.
 */
void qp_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next call into this library on the same
 * thread; do not free it.
 */
const char *qp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *qp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QPROP_H */
