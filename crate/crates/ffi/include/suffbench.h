#ifndef SUFFBENCH_H
#define SUFFBENCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every call.
 */
typedef enum SbStatus {
  SB_STATUS_OK = 0,
  SB_STATUS_NULL_POINTER = 1,
  SB_STATUS_INVALID_UTF8 = 2,
  SB_STATUS_PARSE = 3,
  SB_STATUS_SHAPE = 4,
  SB_STATUS_NORMALIZATION = 5,
  SB_STATUS_DOMAIN = 6,
  SB_STATUS_PRECONDITION = 7,
  SB_STATUS_OUT_OF_RANGE = 8,
  SB_STATUS_IO = 9,
  SB_STATUS_BUFFER_TOO_SMALL = 10,
  SB_STATUS_PANIC = 11,
} SbStatus;

/**
 * Parsed model file (family or joint distribution).
 */
typedef struct SbModel SbModel;

/**
 * Canonical partition of one model axis.
 */
typedef struct SbStatistic SbStatistic;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Error code of the last failed call on this thread ("" after success).
 * The pointer stays valid until the next call on this thread.
 */
const char *sb_last_error_code(void);

/**
 * Human-readable message of the last failed call on this thread.
 */
const char *sb_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *sb_version(void);

/**
 * Parses a JSON model file body.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum SbStatus sb_model_from_json(const char *json, struct SbModel **out);

/**
 * # Safety
 * `model` must come from [`sb_model_from_json`] and not be freed twice.
 */
void sb_model_free(struct SbModel *model);

/**
 * Parses one `{axis, map}` statistic against the axes of `model`.
 *
 * # Safety
 * Pointers must be valid; `json` NUL-terminated.
 */
enum SbStatus sb_statistic_from_json(const struct SbModel *model,
                                     const char *json,
                                     struct SbStatistic **out);

/**
 * # Safety
 * `stat` must come from this library and not be freed twice.
 */
void sb_statistic_free(struct SbStatistic *stat);

/**
 * # Safety
 * Pointers must be valid.
 */
enum SbStatus sb_statistic_num_classes(const struct SbStatistic *stat, size_t *out);

/**
 * Copies the class label of every domain symbol into `buf`. `written`
 * receives the domain size; if `len` is smaller, nothing is copied and
 * `SB_STATUS_BUFFER_TOO_SMALL` is returned.
 *
 * # Safety
 * `buf` must hold `len` writable entries; other pointers must be valid.
 */
enum SbStatus sb_statistic_labels(const struct SbStatistic *stat,
                                  size_t *buf,
                                  size_t len,
                                  size_t *written);

/**
 * θ − T(X) − X for a statistic on all observations or on one axis.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SbStatus sb_is_sufficient(const struct SbModel *model,
                               const struct SbStatistic *stat,
                               double threshold_bits,
                               bool *holds,
                               double *cmi_bits);

/**
 * θ − (T(X), Y) − X with X the statistic's axis and Y `given_axis`.
 *
 * # Safety
 * Pointers must be valid; `given_axis` NUL-terminated.
 */
enum SbStatus sb_is_conditionally_sufficient(const struct SbModel *model,
                                             const struct SbStatistic *stat,
                                             const char *given_axis,
                                             double threshold_bits,
                                             bool *holds,
                                             double *cmi_bits);

/**
 * Minimal sufficient statistic on all observations, or on `axis` when it
 * is non-null.
 *
 * # Safety
 * Pointers must be valid; `axis` may be null.
 */
enum SbStatus sb_minimal_sufficient(const struct SbModel *model,
                                    const char *axis,
                                    struct SbStatistic **out);

/**
 * Entropy in bits of the minimal sufficient statistic of Y for X, with
 * the model read as an (X, Y) source.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SbStatus sb_corner_point(const struct SbModel *model, double *out);

/**
 * Runs a command-line invocation (`argv[0]` is the program name) and
 * returns its JSON report in `report` (free with [`sb_string_free`]) and
 * its exit code in `exit_code`.
 *
 * # Safety
 * `argv` must hold `argc` NUL-terminated strings; outputs must be valid.
 */
enum SbStatus sb_run(size_t argc, const char *const *argv, char **report, int32_t *exit_code);

/**
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void sb_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SUFFBENCH_H */
