#ifndef RADAR_LZ_H
#define RADAR_LZ_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RlzStatus {
  RLZ_STATUS_OK = 0,
  RLZ_STATUS_NULL_POINTER = 1,
  RLZ_STATUS_INVALID_ARGUMENT = 2,
  RLZ_STATUS_ALPHABET_VIOLATION = 3,
  RLZ_STATUS_COST_BOUND = 4,
  RLZ_STATUS_CONFIG = 5,
  RLZ_STATUS_IO = 6,
  RLZ_STATUS_UNDEFINED = 7,
  RLZ_STATUS_PANIC = 8,
} RlzStatus;

/**
 * Opaque learner handle.
 */
typedef struct RlzLearner RlzLearner;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *rlz_last_error(void);

/**
 * Creates a learner with default settings and the given seed.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum RlzStatus rlz_learner_new(uint32_t observations,
                               uint32_t actions,
                               uint64_t seed,
                               struct RlzLearner **out);

/**
 * Creates a learner from a TOML learner section (same keys as `[learner]`
 * in an experiment config).
 *
 * # Safety
 * `config_toml` must be a NUL-terminated string; `out` must be writable.
 */
enum RlzStatus rlz_learner_new_with_config(uint32_t observations,
                                           uint32_t actions,
                                           const char *config_toml,
                                           struct RlzLearner **out);

/**
 * Releases a learner. NULL is ignored.
 *
 * # Safety
 * `handle` must come from `rlz_learner_new*` and not be used afterwards.
 */
void rlz_learner_free(struct RlzLearner *handle);

/**
 * Chooses a waveform index for the current observation symbol.
 *
 * # Safety
 * `handle` must be a live learner; `out_action` must be writable.
 */
enum RlzStatus rlz_learner_select(struct RlzLearner *handle, uint32_t obs, uint32_t *out_action);

/**
 * Reports the outcome of the last selected waveform.
 *
 * # Safety
 * `handle` must be a live learner.
 */
enum RlzStatus rlz_learner_observe(struct RlzLearner *handle,
                                   uint32_t obs,
                                   uint32_t action,
                                   double cost,
                                   uint32_t next_obs);

/**
 * Running average cost; `RLZ_STATUS_UNDEFINED` before the first step.
 *
 * # Safety
 * `handle` must be a live learner; `out` must be writable.
 */
enum RlzStatus rlz_learner_average_cost(struct RlzLearner *handle, double *out);

/**
 * Number of context-tree nodes including the root; 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live learner.
 */
size_t rlz_learner_node_count(const struct RlzLearner *handle);

/**
 * Runs the experiment described by a TOML config file and writes its CSVs
 * and plots into `out_dir`.
 *
 * # Safety
 * Both arguments must be NUL-terminated strings.
 */
enum RlzStatus rlz_run_experiment(const char *config_path, const char *out_dir);

/**
 * Observation symbol for an occupancy index over `subchannels` bands and a
 * detection flag.
 *
 * # Safety
 * `out_symbol` must be writable.
 */
enum RlzStatus rlz_quantize(uint32_t subchannels,
                            uint32_t occupancy_index,
                            bool detected,
                            uint32_t *out_symbol);

/**
 * Writes a Zadoff-Chu sequence into two caller-provided arrays of `length`.
 *
 * # Safety
 * `out_re` and `out_im` must each point to `length` writable doubles.
 */
enum RlzStatus rlz_zadoff_chu(size_t length, size_t root, double *out_re, double *out_im);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RADAR_LZ_H */
