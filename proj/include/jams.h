#ifndef JAMS_H
#define JAMS_H

/* C interface to the jumping adaptive multimodal sampler.
 *
 * All functions that can fail return a jams_status; on failure a
 * human-readable message is available from jams_last_error() until the next
 * failing call on the same thread.  Objects returned through out-parameters
 * are owned by the caller and released with the matching *_free function.
 * Strings returned through out-parameters are released with
 * jams_string_free.
 */

#include <stdint.h>

#if defined(_WIN32)
#define JAMS_API __declspec(dllexport)
#else
#define JAMS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status values double as process exit codes. */
typedef enum jams_status {
  JAMS_OK = 0,
  JAMS_ERR_CONFIG = 2,  /* invalid configuration or input files */
  JAMS_ERR_NUMERIC = 3, /* unrecoverable numerical failure */
  JAMS_ERR_PARTIAL = 4, /* some replications failed, others completed */
  JAMS_ERR_IO = 5       /* filesystem failure */
} jams_status;

typedef struct jams_spec jams_spec;     /* experiment configuration */
typedef struct jams_modes jams_modes;   /* mode-search result */
typedef struct jams_report jams_report; /* burn-in report */

/* --- configuration ------------------------------------------------------ */

/* Published defaults for a built-in target: "gaussian_mixture", "banana_t"
 * or "sensor".  dim <= 0 selects the target's default dimension. */
JAMS_API jams_status jams_spec_default(const char* target, int dim, jams_spec** out);

/* Parse the key/value config format (see README / config docs). */
JAMS_API jams_status jams_spec_from_text(const char* text, jams_spec** out);
JAMS_API jams_status jams_spec_from_file(const char* path, jams_spec** out);

/* Canonical text form; parsing it back yields an identical spec. */
JAMS_API jams_status jams_spec_to_text(const jams_spec* spec, char** out_text);

/* Set one key, e.g. ("run.iters", "100000"), ("seed", "7"),
 * ("burnin.box_low", "-2").  Same keys as the config file. */
JAMS_API jams_status jams_spec_set(jams_spec* spec, const char* key, const char* value);

JAMS_API jams_status jams_spec_set_seed(jams_spec* spec, uint64_t seed);
JAMS_API jams_status jams_spec_set_workers(jams_spec* spec, int workers);
JAMS_API jams_status jams_spec_set_output_dir(jams_spec* spec, const char* dir);
JAMS_API jams_status jams_spec_get_output_dir(const jams_spec* spec, char** out_dir);

JAMS_API void jams_spec_free(jams_spec* spec);

/* --- pipeline ------------------------------------------------------------ */

/* Mode search (uniform starts + BFGS + merge); writes <out>/modes.txt and
 * returns the result. */
JAMS_API jams_status jams_find_modes(const jams_spec* spec, jams_modes** out);

JAMS_API jams_status jams_modes_load(const char* path, jams_modes** out);
JAMS_API jams_status jams_modes_save(const jams_modes* modes, const char* path);
JAMS_API int jams_modes_count(const jams_modes* modes);
JAMS_API jams_status jams_modes_summary(const jams_modes* modes, char** out_text);
JAMS_API void jams_modes_free(jams_modes* modes);

/* Covariance-estimation rounds; modes_path NULL or empty runs the mode
 * search first.  Writes <out>/burnin_report.txt. */
JAMS_API jams_status jams_burnin(const jams_spec* spec, const char* modes_path,
                                 jams_report** out);

JAMS_API jams_status jams_report_load(const char* path, jams_report** out);
JAMS_API jams_status jams_report_save(const jams_report* report, const char* path);
JAMS_API jams_status jams_report_summary(const jams_report* report, char** out_text);
JAMS_API void jams_report_free(jams_report* report);

/* Main runs from a saved burn-in report: every configured jump flavor times
 * every replication, each writing
 * <out>/<flavor>-rep<r>/{samples.csv,summary.json,timing.txt}. */
JAMS_API jams_status jams_sample(const jams_spec* spec, const char* report_path);

/* Full benchmark: per-replication burn-in (seed+r) plus all flavors, then
 * <out>/bench_report.json and <out>/bench_long.csv.  Returns
 * JAMS_ERR_PARTIAL when some but not all replication runs failed. */
JAMS_API jams_status jams_bench(const jams_spec* spec);

/* --- misc ---------------------------------------------------------------- */

JAMS_API const char* jams_last_error(void);
JAMS_API void jams_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* JAMS_H */
