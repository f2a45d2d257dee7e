/* C interface to the rotd library: regularized off-policy temporal-difference
 * learning experiments behind opaque handles and integer status codes.
 *
 * Every function that can fail returns a rotd_status; rotd_last_error() gives
 * the matching message for the calling thread. Handles are created by the
 * library and released with the matching *_free call.
 */

#ifndef ROTD_H
#define ROTD_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rotd_status {
  ROTD_OK = 0,
  ROTD_ERR_CONFIG = 1,       /* config file missing, malformed or inconsistent */
  ROTD_ERR_IO = 2,           /* filesystem failure */
  ROTD_ERR_ALL_DIVERGED = 3, /* every run of the experiment diverged */
  ROTD_ERR_INVALID = 4,      /* bad argument (unknown metric, null handle, ...) */
  ROTD_ERR_NUMERIC = 5,      /* numerical failure inside a solver or oracle */
  ROTD_ERR_INTERNAL = 6
} rotd_status;

typedef struct rotd_config rotd_config;
typedef struct rotd_results rotd_results;

const char* rotd_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* rotd_last_error(void);

/* ---- configuration ---- */

rotd_status rotd_config_parse(const char* path, rotd_config** out);
rotd_status rotd_config_parse_text(const char* text, const char* origin, rotd_config** out);
rotd_status rotd_config_set_output_dir(rotd_config* config, const char* dir);
/* Experiment name ("star", "random-walk", ...); NULL on a null handle. */
const char* rotd_config_experiment(const rotd_config* config);
const char* rotd_config_output_dir(const rotd_config* config);
int rotd_config_plot_enabled(const rotd_config* config);
void rotd_config_free(rotd_config* config);

/* ---- execution ---- */

/* Runs every (algorithm, basis, seed) combination of the config. Divergent
 * runs are recorded, not fatal; the call fails with ROTD_ERR_ALL_DIVERGED
 * only when no run completed (a results handle is still returned). */
rotd_status rotd_run(const rotd_config* config, rotd_results** out);
int rotd_results_run_count(const rotd_results* results);
int rotd_results_diverged_count(const rotd_results* results);
void rotd_results_free(rotd_results* results);

/* ---- reporting ---- */

/* One trace CSV per algorithm/basis group under dir. The path list is
 * newline-separated and owned by the caller (release with rotd_text_free). */
rotd_status rotd_results_write_csv(const rotd_results* results, const rotd_config* config,
                                   const char* dir, char** paths_out);

/* SVG chart of one or more comma-separated diagnostics metrics.
 * log_scale: 0 linear, 1 logarithmic, -1 default for the metric. */
rotd_status rotd_results_write_plot(const rotd_results* results, const char* metric,
                                    const char* path, int log_scale);

/* Multi-seed summary text; owned by the caller (rotd_text_free). */
rotd_status rotd_results_summary(const rotd_results* results, const rotd_config* config,
                                 char** text_out);

/* Chart built from previously written trace CSVs, one curve per file and
 * metric. */
rotd_status rotd_plot_csv(const char* const* csv_paths, int n_csv, const char* metric,
                          const char* out_path, int log_scale);

void rotd_text_free(char* text);

/* ---- presets ---- */

int rotd_preset_count(void);
/* Name of the i-th preset, NULL when out of range. */
const char* rotd_preset_name(int index);
/* Embedded config text for a preset name, NULL when unknown. */
const char* rotd_preset_content(const char* name);

#ifdef __cplusplus
}
#endif

#endif /* ROTD_H */
