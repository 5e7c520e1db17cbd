#ifndef EPRSIM_H
#define EPRSIM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum EprsimStatus {
  EPRSIM_STATUS_OK = 0,
  EPRSIM_STATUS_NULL_POINTER = 1,
  /**
   * Unreadable or malformed config.
   */
  EPRSIM_STATUS_CONFIG = 2,
  EPRSIM_STATUS_INVALID_PARAMETER = 3,
  EPRSIM_STATUS_INVALID_RUN = 4,
  EPRSIM_STATUS_IO = 5,
  EPRSIM_STATUS_INTERNAL = 6,
  EPRSIM_STATUS_BUFFER_TOO_SMALL = 7,
  EPRSIM_STATUS_UTF8 = 8,
  EPRSIM_STATUS_PANIC = 9,
} EprsimStatus;

typedef enum EprsimAlice {
  EPRSIM_ALICE_FOCAL = 0,
  EPRSIM_ALICE_OFF_FOCAL_L = 1,
  EPRSIM_ALICE_OFF_FOCAL_M = 2,
  EPRSIM_ALICE_OFF_FOCAL_SUM = 3,
} EprsimAlice;

typedef enum EprsimRule {
  EPRSIM_RULE_VON_NEUMANN_OFF_FOCAL = 0,
  EPRSIM_RULE_LUEDERS_FOCAL = 1,
  EPRSIM_RULE_COHERENT_FOCAL = 2,
} EprsimRule;

/**
 * Opaque experiment configuration.
 */
typedef struct EprsimConfig EprsimConfig;

/**
 * Opaque screen pattern.
 */
typedef struct EprsimPattern EprsimPattern;

typedef struct EprsimMarginals {
  double trace_dist;
  double helstrom_success;
  double trace_dist_lueders;
  double rho_f_largest_eigenvalue;
  double rho_g_largest_eigenvalue;
} EprsimMarginals;

typedef struct EprsimComparison {
  size_t n_bins;
  double max_rel_dev_coherent;
  double lueders_spread;
} EprsimComparison;

typedef struct EprsimRunSummary {
  uint64_t trials;
  uint64_t ones;
  uint8_t intended_bit;
  double bit_error_rate;
  double mean_visibility;
} EprsimRunSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *eprsim_version(void);

/**
 * Copies the calling thread's last error message into `buf`.
 *
 * # Safety
 * `buf` must point to `len` writable bytes or be null; `needed` must be
 * null or writable.
 */
enum EprsimStatus eprsim_last_error_message(char *buf, size_t len, size_t *needed);

/**
 * Default configuration. Never null.
 */
struct EprsimConfig *eprsim_config_new(void);

/**
 * Parses config text (`key = value` lines) and validates it.
 *
 * # Safety
 * `source` must be a NUL-terminated string; `out` must be writable.
 */
enum EprsimStatus eprsim_config_parse(const char *source, struct EprsimConfig **out);

/**
 * Reads and validates a config file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EprsimStatus eprsim_config_load(const char *path, struct EprsimConfig **out);

/**
 * Sets one key. The config is left unchanged if the result would not
 * validate.
 *
 * # Safety
 * `cfg` must come from this library; `key` and `value` must be
 * NUL-terminated strings.
 */
enum EprsimStatus eprsim_config_set(struct EprsimConfig *cfg, const char *key, const char *value);

/**
 * Canonical config text, as accepted by [`eprsim_config_parse`].
 *
 * # Safety
 * `cfg` must come from this library; see [`eprsim_last_error_message`]
 * for the buffer contract.
 */
enum EprsimStatus eprsim_config_text(const struct EprsimConfig *cfg,
                                     char *buf,
                                     size_t len,
                                     size_t *needed);

/**
 * 16 hex digits identifying the config.
 *
 * # Safety
 * As for [`eprsim_config_text`].
 */
enum EprsimStatus eprsim_config_hash(const struct EprsimConfig *cfg,
                                     char *buf,
                                     size_t len,
                                     size_t *needed);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void eprsim_config_free(struct EprsimConfig *cfg);

/**
 * Raw analytic coincidence pattern on the configured screen grid.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum EprsimStatus eprsim_pattern_compute(const struct EprsimConfig *cfg,
                                         enum EprsimAlice setting,
                                         struct EprsimPattern **out);

/**
 * Number of screen points; 0 for null.
 *
 * # Safety
 * `p` must come from this library or be null.
 */
size_t eprsim_pattern_len(const struct EprsimPattern *p);

/**
 * Screen positions in meters, `eprsim_pattern_len` entries, owned by the
 * pattern. Null for a null pattern.
 *
 * # Safety
 * `p` must come from this library or be null.
 */
const double *eprsim_pattern_positions(const struct EprsimPattern *p);

/**
 * Rates, `eprsim_pattern_len` entries, owned by the pattern.
 *
 * # Safety
 * `p` must come from this library or be null.
 */
const double *eprsim_pattern_values(const struct EprsimPattern *p);

/**
 * # Safety
 * `p` must come from this library and not be used afterwards. Null is
 * ignored.
 */
void eprsim_pattern_free(struct EprsimPattern *p);

/**
 * Bob's marginals for the entangled pair (`product == 0`) or for `|HH⟩`.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum EprsimStatus eprsim_marginals(const struct EprsimConfig *cfg,
                                   bool product,
                                   struct EprsimMarginals *out);

/**
 * Field route against the measurement route on the screen grid.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum EprsimStatus eprsim_compare(const struct EprsimConfig *cfg, struct EprsimComparison *out);

/**
 * Seeded Monte Carlo trials with the default decoder window.
 *
 * # Safety
 * `cfg` must come from this library; `out` must be writable.
 */
enum EprsimStatus eprsim_run(const struct EprsimConfig *cfg,
                             enum EprsimRule measurement_rule,
                             uint64_t n_events,
                             uint64_t seed,
                             uint64_t trials,
                             double threshold,
                             struct EprsimRunSummary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPRSIM_H */
