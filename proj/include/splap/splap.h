/* splap C API.
 *
 * Handles are opaque and owned by the caller; free them with the matching
 * *_free function. Every function returning splap_status stores a message
 * retrievable with splap_last_error() on failure (per thread).
 * Strings returned through char** are heap allocated; release them with
 * splap_string_free().
 */
#ifndef SPLAP_SPLAP_H
#define SPLAP_SPLAP_H

#include <stddef.h>
#include <stdint.h>

#if defined(SPLAP_BUILDING_LIBRARY)
#define SPLAP_API __attribute__((visibility("default")))
#else
#define SPLAP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum splap_status {
  SPLAP_OK = 0,
  SPLAP_ERR_INVALID_ARGUMENT = 1,
  SPLAP_ERR_SOLVER = 2,
  SPLAP_ERR_CONFIG = 3,
  SPLAP_ERR_IO = 4,
  SPLAP_ERR_PATH = 5,
  SPLAP_ERR_INTERNAL = 6
} splap_status;

typedef struct splap_config splap_config;
typedef struct splap_result splap_result;

SPLAP_API const char* splap_version(void);
SPLAP_API const char* splap_status_name(splap_status status);
/* Message of the last failed call on this thread; "" if none. */
SPLAP_API const char* splap_last_error(void);
SPLAP_API void splap_string_free(char* text);

/* ---- configuration ---------------------------------------------------- */

SPLAP_API splap_status splap_config_default(splap_config** out);
SPLAP_API splap_status splap_config_parse(const char* text, splap_config** out);
SPLAP_API splap_status splap_config_load(const char* path, splap_config** out);
SPLAP_API void splap_config_free(splap_config* cfg);
/* Applies one assignment, e.g. ("mc.seed", "7"). */
SPLAP_API splap_status splap_config_set(splap_config* cfg, const char* key, const char* value);
/* Canonical text form; parses back to the same configuration. */
SPLAP_API splap_status splap_config_echo(const splap_config* cfg, char** text);
/* Number of violated invariants; 0 iff runnable. */
SPLAP_API size_t splap_config_violation_count(const splap_config* cfg);
/* Newline separated list of violations (empty string when valid). */
SPLAP_API splap_status splap_config_violations(const splap_config* cfg, char** text);
/* Reads and checks a config file, collecting malformed lines and violated
 * invariants. Fails only when the file cannot be read. */
SPLAP_API splap_status splap_validate_file(const char* path, size_t* n_violations, char** report);

/* ---- experiments ------------------------------------------------------ */

/* Space separated list of subcommand names. */
SPLAP_API const char* splap_subcommands(void);
/* Runs a subcommand and writes its files into out_dir. Returns SPLAP_OK even
 * when thresholds fail; query splap_result_passed. */
SPLAP_API splap_status splap_run(const char* subcommand, const splap_config* cfg,
                                 const char* out_dir, splap_result** out);
SPLAP_API void splap_result_free(splap_result* result);
SPLAP_API int splap_result_passed(const splap_result* result);
/* Comma separated names of failing quantities. */
SPLAP_API const char* splap_result_failures(const splap_result* result);
SPLAP_API double splap_result_seconds(const splap_result* result);
SPLAP_API size_t splap_result_summary_count(const splap_result* result);
/* Any output pointer may be NULL. NaN marks a missing stderr or threshold. */
SPLAP_API splap_status splap_result_summary(const splap_result* result, size_t index,
                                            const char** quantity, double* value,
                                            double* std_error, double* threshold, int* pass);
SPLAP_API size_t splap_result_file_count(const splap_result* result);
SPLAP_API const char* splap_result_file(const splap_result* result, size_t index);

/* ---- numerics --------------------------------------------------------- */

/* Evaluates a catalog function such as "hk_delta(2, 0.5)" at r. */
SPLAP_API splap_status splap_truncation_eval(const char* spec, double r, double* value,
                                             double* d1, double* d2);
/* One backward-Euler p-Laplace step on (0, length) with n_cells cells:
 * g and w hold the n_cells - 1 interior values. */
SPLAP_API splap_status splap_implicit_step(size_t n_cells, double length, double dt, double p,
                                           double eps, const double* g, double* w);
/* Brownian increments of path `index` for the given seed. */
SPLAP_API splap_status splap_brownian_increments(uint64_t seed, uint64_t index, size_t steps,
                                                 double dt, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SPLAP_SPLAP_H */
