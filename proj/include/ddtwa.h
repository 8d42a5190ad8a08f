/* ddtwa - stochastic phase-space simulator for dissipative spin ensembles.
 *
 * C API of the shared library. All objects are opaque handles created and
 * destroyed by the library; every fallible call returns a ddtwa_status and
 * leaves a human-readable message in ddtwa_last_error() on failure.
 */
#ifndef DDTWA_H
#define DDTWA_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define DDTWA_API __attribute__((visibility("default")))

typedef struct ddtwa_scenario ddtwa_scenario;
typedef struct ddtwa_series ddtwa_series;

typedef enum ddtwa_status {
  DDTWA_OK = 0,
  DDTWA_ERR_CONFIG = 1,    /* invalid scenario or parameters */
  DDTWA_ERR_NUMERICAL = 2, /* integration failure */
  DDTWA_ERR_IO = 3,        /* file read/write failure */
  DDTWA_ERR_INVALID = 4    /* null handle or bad argument */
} ddtwa_status;

DDTWA_API const char* ddtwa_version(void);

/* Thread-local message for the most recent failure. */
DDTWA_API const char* ddtwa_last_error(void);

/* ---- scenarios ------------------------------------------------------- */

DDTWA_API ddtwa_status ddtwa_scenario_from_file(const char* path, ddtwa_scenario** out);
DDTWA_API ddtwa_status ddtwa_scenario_from_string(const char* json_text, ddtwa_scenario** out);
DDTWA_API ddtwa_status ddtwa_scenario_clone(const ddtwa_scenario* scenario, ddtwa_scenario** out);

/* Dotted-path override, e.g. ("run.seed", "7") or ("model.fields.omega", "2.0").
 * The value string is parsed as JSON when possible. */
DDTWA_API ddtwa_status ddtwa_scenario_set(ddtwa_scenario* scenario, const char* key,
                                          const char* value);

/* Canonical resolved configuration as a JSON string (owned by the scenario,
 * valid until the next call on the same handle). */
DDTWA_API const char* ddtwa_scenario_resolved_json(ddtwa_scenario* scenario);

DDTWA_API void ddtwa_scenario_free(ddtwa_scenario* scenario);

/* ---- runs ------------------------------------------------------------ */

/* Stochastic ensemble run; threads <= 0 selects hardware concurrency. */
DDTWA_API ddtwa_status ddtwa_run(const ddtwa_scenario* scenario, int threads, ddtwa_series** out);

/* Exact dense master-equation oracle on the same scenario and grid. */
DDTWA_API ddtwa_status ddtwa_oracle(const ddtwa_scenario* scenario, ddtwa_series** out);

/* Deterministic mean-field reference. */
DDTWA_API ddtwa_status ddtwa_mean_field(const ddtwa_scenario* scenario, ddtwa_series** out);

/* Steady-state scan over a single parameter. `values` has `n_values`
 * entries; the result's time column carries the parameter values. */
DDTWA_API ddtwa_status ddtwa_sweep(const ddtwa_scenario* scenario, const char* parameter,
                                   const double* values, size_t n_values, int threads,
                                   ddtwa_series** out);

/* ---- series ----------------------------------------------------------- */

DDTWA_API size_t ddtwa_series_rows(const ddtwa_series* series);
DDTWA_API size_t ddtwa_series_columns(const ddtwa_series* series);
DDTWA_API const char* ddtwa_series_column_name(const ddtwa_series* series, size_t column);
DDTWA_API ddtwa_status ddtwa_series_time(const ddtwa_series* series, double* out, size_t capacity);
DDTWA_API ddtwa_status ddtwa_series_column(const ddtwa_series* series, size_t column,
                                           double* values, double* stderrs, size_t capacity);

/* Metadata JSON (owned by the series). */
DDTWA_API const char* ddtwa_series_metadata_json(const ddtwa_series* series);

DDTWA_API ddtwa_status ddtwa_series_write_csv(const ddtwa_series* series, const char* path);
DDTWA_API ddtwa_status ddtwa_series_write_metadata(const ddtwa_series* series, const char* path);
DDTWA_API ddtwa_status ddtwa_series_read_csv(const char* path, ddtwa_series** out);

DDTWA_API void ddtwa_series_free(ddtwa_series* series);

/* ---- comparison ------------------------------------------------------- */

/* Stderr-aware comparison: every shared column must satisfy
 * |a - b| <= abs_floor + z_max * sqrt(se_a^2 + se_b^2) at every row.
 * `pass` receives 1/0; `report_json` (optional) receives a malloc'd report,
 * release it with ddtwa_string_free. */
DDTWA_API ddtwa_status ddtwa_compare(const ddtwa_series* a, const ddtwa_series* b, double z_max,
                                     double abs_floor, int* pass, char** report_json);

DDTWA_API void ddtwa_string_free(char* text);

#ifdef __cplusplus
}
#endif

#endif /* DDTWA_H */
