#ifndef NSSAR_H
#define NSSAR_H

/* Generated by cbindgen from the nssar-ffi crate. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum NssarStatus {
  NSSAR_STATUS_OK = 0,
  NSSAR_STATUS_NULL_POINTER = 1,
  NSSAR_STATUS_INVALID_PARAM = 2,
  NSSAR_STATUS_CONFIG = 3,
  NSSAR_STATUS_DOMAIN = 4,
  NSSAR_STATUS_ANALYSIS = 5,
  NSSAR_STATUS_IO = 6,
  NSSAR_STATUS_UTF8 = 7,
  NSSAR_STATUS_BUFFER_TOO_SMALL = 8,
  NSSAR_STATUS_PANIC = 9,
} NssarStatus;

/**
 * Run configuration handle.
 */
typedef struct NssarConfig NssarConfig;

/**
 * Modulator channel handle.
 */
typedef struct NssarModulator NssarModulator;

/**
 * Analytic noise budget, powers in V².
 */
typedef struct NssarBudget {
  double snp;
  double qnp;
  double mnp;
  double sndr_db;
  double enob_bits;
} NssarBudget;

/**
 * Metrics of one simulated trial. Fields that do not apply are NaN.
 */
typedef struct NssarMetrics {
  double sndr_db;
  double sfdr_db;
  double enob_bits;
  double fom_s_db;
  double decimated_sndr_db;
  double residual_mismatch_std;
} NssarMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` as a
 * NUL-terminated string. Returns the buffer size needed, including the NUL;
 * nothing is written when `buf` is null or `len` is too small.
 */
size_t nssar_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *nssar_version(void);

/**
 * New configuration holding the defaults. Free with [`nssar_config_free`].
 */
struct NssarConfig *nssar_config_new(void);

/**
 * Parses `section.key = value` text into a new configuration.
 */
enum NssarStatus nssar_config_parse(const char *text, struct NssarConfig **out);

/**
 * Sets one key. The configuration is validated as a whole on use.
 */
enum NssarStatus nssar_config_set(struct NssarConfig *cfg, const char *key, const char *value);

/**
 * Copies the 16-digit configuration hash into `buf` (17 bytes with NUL).
 */
enum NssarStatus nssar_config_hash(const struct NssarConfig *cfg, char *buf, size_t len);

/**
 * Frees a configuration; null is ignored.
 */
void nssar_config_free(struct NssarConfig *cfg);

/**
 * Analytic noise budget of the configured design.
 */
enum NssarStatus nssar_precision(const struct NssarConfig *cfg, struct NssarBudget *out);

/**
 * Runs one full trial (calibration, conversion, analysis) with `seed`.
 */
enum NssarStatus nssar_simulate(const struct NssarConfig *cfg,
                                uint64_t seed,
                                struct NssarMetrics *out);

/**
 * New modulator for the configuration and seed, calibrated or loaded with
 * trims as configured. Free with [`nssar_modulator_free`].
 */
enum NssarStatus nssar_modulator_new(const struct NssarConfig *cfg,
                                     uint64_t seed,
                                     struct NssarModulator **out);

/**
 * Converts one input sample in volts; writes the output code (signed LSBs).
 */
enum NssarStatus nssar_modulator_convert(struct NssarModulator *m, double v_in, int64_t *code);

/**
 * Converts `n` samples from `input` into `codes`.
 */
enum NssarStatus nssar_modulator_convert_block(struct NssarModulator *m,
                                               const double *input,
                                               int64_t *codes,
                                               size_t n);

/**
 * Quantiser LSB of the modulator, V; NaN for a null handle.
 */
double nssar_modulator_lsb(const struct NssarModulator *m);

/**
 * Writes the first `len` taps of the loop's error-transfer impulse response.
 */
enum NssarStatus nssar_modulator_ntf(const struct NssarModulator *m, double *taps, size_t len);

/**
 * Frees a modulator; null is ignored.
 */
void nssar_modulator_free(struct NssarModulator *m);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSSAR_H */
