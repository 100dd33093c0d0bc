#ifndef DIGISUB_H
#define DIGISUB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; regenerate with `cbindgen --config cbindgen.toml --output include/digisub.h` */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum DsStatus {
  DS_STATUS_OK = 0,
  DS_STATUS_NULL_POINTER = 1,
  DS_STATUS_INVALID_ARGUMENT = 2,
  DS_STATUS_UTF8 = 3,
  DS_STATUS_CONFIG = 4,
  DS_STATUS_SIMULATION = 5,
  DS_STATUS_MODEL = 6,
  DS_STATUS_CODEC = 7,
  /**
   * The output buffer is too small; the required size was written.
   */
  DS_STATUS_BUFFER_TOO_SMALL = 8,
  DS_STATUS_PANIC = 9,
} DsStatus;

/**
 * Opaque trained-model handle.
 */
typedef struct DsModel DsModel;

/**
 * Opaque simulator handle.
 */
typedef struct DsSim DsSim;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (empty after success).
 * Returns the size needed including the NUL; writes nothing if `len` is
 * smaller.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t ds_last_error(char *buf, size_t len);

/**
 * Builds the 14-bus system with default protection settings.
 *
 * # Safety
 * `out` must point to a writable handle slot.
 */
enum DsStatus ds_sim_new(uint64_t seed, struct DsSim **out);

/**
 * # Safety
 * `sim` must be null or a handle from `ds_sim_new` not yet freed.
 */
void ds_sim_free(struct DsSim *sim);

/**
 * Advances the simulation by `samples` sampling intervals (4800 per second).
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum DsStatus ds_sim_run(struct DsSim *sim, uint64_t samples);

/**
 * Current sample index.
 *
 * # Safety
 * `sim` must be a live handle; `out` writable.
 */
enum DsStatus ds_sim_sample(struct DsSim *sim, uint64_t *out);

/**
 * Schedules a fault at sample `at`. `fault_class` is 1..=10 in the order
 * A-gnd, B-gnd, C-gnd, AB, BC, CA, AB-gnd, BC-gnd, CA-gnd, ABC.
 *
 * # Safety
 * `sim` must be a live handle.
 */
enum DsStatus ds_sim_schedule_fault(struct DsSim *sim,
                                    uint64_t at,
                                    uint32_t branch,
                                    double location,
                                    double impedance_ohm,
                                    uint8_t fault_class);

/**
 * Position of a bay breaker (bus 1..=14, bay from 1).
 *
 * # Safety
 * `sim` must be a live handle; `closed` writable.
 */
enum DsStatus ds_sim_breaker_closed(struct DsSim *sim, uint32_t bus, uint8_t bay, bool *closed);

/**
 * Event log as text, one event per line.
 *
 * # Safety
 * `sim` must be a live handle; `buf` null or `len` writable bytes;
 * `needed` null or writable.
 */
enum DsStatus ds_sim_event_log(struct DsSim *sim, char *buf, size_t len, size_t *needed);

/**
 * Parses a model file's text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` writable.
 */
enum DsStatus ds_model_from_text(const char *text, struct DsModel **out);

/**
 * # Safety
 * `model` must be null or a handle from `ds_model_from_text` not yet freed.
 */
void ds_model_free(struct DsModel *model);

/**
 * Number of features the model expects.
 *
 * # Safety
 * `model` must be a live handle; `out` writable.
 */
enum DsStatus ds_model_input_len(const struct DsModel *model, size_t *out);

/**
 * Classifies one raw (unscaled) feature vector into 0..=11.
 *
 * # Safety
 * `model` must be a live handle, `features` must point to `n` doubles and
 * `class_out` must be writable.
 */
enum DsStatus ds_model_predict(const struct DsModel *model,
                               const double *features,
                               size_t n,
                               uint32_t *class_out);

/**
 * Decodes a hex-encoded SV or GOOSE frame into a field listing.
 *
 * # Safety
 * `hex` must be a NUL-terminated string; `buf`/`needed` as for
 * `ds_sim_event_log`.
 */
enum DsStatus ds_inspect_frame(const char *hex, char *buf, size_t len, size_t *needed);

/**
 * Runs a scenario from TOML config text. `model` may be null for
 * scenarios without an attack. On success `passed` receives the verdict
 * and `buf` its text.
 *
 * # Safety
 * `config` must be a NUL-terminated string, `model` null or live,
 * `passed` writable, `buf`/`needed` as for `ds_sim_event_log`.
 */
enum DsStatus ds_run_scenario(const char *config,
                              const struct DsModel *model,
                              bool *passed,
                              char *buf,
                              size_t len,
                              size_t *needed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIGISUB_H */
