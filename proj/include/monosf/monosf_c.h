/* C API of the mono scene-flow library. All functions return a status code;
 * a human-readable message for the most recent failure on the calling thread
 * is available from monosf_last_error(). Handles are opaque and must be
 * released with their destroy function. */
#ifndef MONOSF_C_H
#define MONOSF_C_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum monosf_status {
  MONOSF_OK = 0,
  MONOSF_ERROR = 1,         /* invalid arguments / domain errors */
  MONOSF_ERROR_CONFIG = 2,  /* configuration problems */
  MONOSF_ERROR_IO = 3,      /* missing or malformed files */
  MONOSF_ERROR_SOLVER = 4   /* optimization failures */
} monosf_status;

typedef struct monosf_config monosf_config;

int monosf_version(void);

/* Message for the last failed call on this thread; empty string if none. */
const char* monosf_last_error(void);

/* Creates a run configuration. `path` may be NULL or empty for defaults.
 * Returns NULL on failure. */
monosf_config* monosf_config_create(const char* path);
void monosf_config_destroy(monosf_config* cfg);

/* Overrides one key=value entry (same keys as the config file). The value is
 * validated when the configuration is used. */
monosf_status monosf_config_set(monosf_config* cfg, const char* key, const char* value);

/* Renders a synthetic fixture set from a synth config file. */
monosf_status monosf_synth(const char* synth_config_path, const char* out_dir);

/* Runs initialization + optimization; writes d0/d1/flow/valid PFMs and the
 * energy trace CSV into the configured output directory. Input paths and the
 * output directory come from the configuration (image0, image1, priors0,
 * priors1, masks0, masks1, matches, out). */
monosf_status monosf_estimate(const monosf_config* cfg);

/* Fits a recalibration map to a MOGC sample file. curve_csv_path may be NULL
 * to skip the calibration-curve output. */
monosf_status monosf_calibrate(const char* samples_path, const char* out_map_path,
                               const char* curve_csv_path);

/* Evaluates an estimate directory against a ground-truth directory; writes
 * the metrics CSV when out_csv_path is non-NULL. */
monosf_status monosf_eval(const char* est_dir, const char* gt_dir, const monosf_config* cfg,
                          const char* out_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* MONOSF_C_H */
