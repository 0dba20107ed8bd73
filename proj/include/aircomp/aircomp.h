/* C interface to the AirComp simulator. Objects are opaque handles; every call
 * returns a status code and, on failure, leaves a message retrievable with
 * aircomp_last_error() on the calling thread. Strings returned through `char**`
 * are owned by the caller and released with aircomp_string_free(). */
#ifndef AIRCOMP_AIRCOMP_H
#define AIRCOMP_AIRCOMP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define AIRCOMP_API __declspec(dllexport)
#else
#define AIRCOMP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aircomp_status {
  AIRCOMP_OK = 0,
  AIRCOMP_ERR_ARGUMENT = 1, /* null handle or bad argument */
  AIRCOMP_ERR_CONFIG = 2,   /* malformed or invalid scenario / sweep description */
  AIRCOMP_ERR_SOLVER = 3,   /* numerical failure or failed certification */
  AIRCOMP_ERR_IO = 4,
  AIRCOMP_ERR_INTERNAL = 5
} aircomp_status;

typedef enum aircomp_format { AIRCOMP_FORMAT_CSV = 0, AIRCOMP_FORMAT_JSON = 1 } aircomp_format;

typedef struct aircomp_config aircomp_config;
typedef struct aircomp_solution aircomp_solution;
typedef struct aircomp_sweep aircomp_sweep;
typedef struct aircomp_sweep_result aircomp_sweep_result;

AIRCOMP_API const char* aircomp_last_error(void);
AIRCOMP_API const char* aircomp_version(void);
AIRCOMP_API void aircomp_string_free(char* s);

/* Scenario */
AIRCOMP_API aircomp_status aircomp_config_default(aircomp_config** out);
AIRCOMP_API aircomp_status aircomp_config_parse(const char* json, aircomp_config** out);
AIRCOMP_API aircomp_status aircomp_config_load(const char* path, aircomp_config** out);
AIRCOMP_API aircomp_status aircomp_config_set_seed(aircomp_config* config, uint64_t seed);
AIRCOMP_API aircomp_status aircomp_config_get_seed(const aircomp_config* config, uint64_t* seed);
AIRCOMP_API aircomp_status aircomp_config_to_json(const aircomp_config* config, char** out);
AIRCOMP_API void aircomp_config_free(aircomp_config* config);

/* Solvers. `algorithm` is one of upper_bound, cluster_adaptive, dynamic,
 * low_complexity, random_bf, no_irs, oracle. Channels are synthesized from the
 * config (seed included). The upper bound yields a solution with no patterns whose
 * objective is the bound value. The getters return NaN (or 0 iterations) for a null
 * handle. */
AIRCOMP_API aircomp_status aircomp_solve(const aircomp_config* config, const char* algorithm,
                                         aircomp_solution** out);
AIRCOMP_API double aircomp_solution_objective(const aircomp_solution* s);
AIRCOMP_API double aircomp_solution_mean_rate(const aircomp_solution* s);
AIRCOMP_API int aircomp_solution_iterations(const aircomp_solution* s);
AIRCOMP_API double aircomp_solution_wallclock(const aircomp_solution* s);
AIRCOMP_API aircomp_status aircomp_solution_to_json(const aircomp_solution* s, char** out);
/* Recomputes the objective of a saved solution record from scratch. */
AIRCOMP_API aircomp_status aircomp_solution_verify_json(const char* json, double* stored, double* recomputed);
AIRCOMP_API void aircomp_solution_free(aircomp_solution* s);

/* One instance, several algorithms on the same channels. `algorithms` is a
 * comma-separated list; null selects every algorithm except the oracle. The result
 * uses the sweep table layout with axis "instance" and the seed as axis value.
 * Failed algorithms become flagged rows; the call itself still succeeds. */
AIRCOMP_API aircomp_status aircomp_simulate(const aircomp_config* config, const char* algorithms,
                                            int keep_solutions, aircomp_sweep_result** out);

/* Sweeps */
AIRCOMP_API aircomp_status aircomp_sweep_parse(const char* json, aircomp_sweep** out);
AIRCOMP_API aircomp_status aircomp_sweep_load(const char* path, aircomp_sweep** out);
AIRCOMP_API aircomp_status aircomp_sweep_set_seed(aircomp_sweep* spec, uint64_t seed);
AIRCOMP_API void aircomp_sweep_free(aircomp_sweep* spec);
AIRCOMP_API aircomp_status aircomp_sweep_run(const aircomp_sweep* spec, int jobs, int keep_solutions,
                                             aircomp_sweep_result** out);
AIRCOMP_API size_t aircomp_sweep_result_rows(const aircomp_sweep_result* r);
AIRCOMP_API size_t aircomp_sweep_result_failures(const aircomp_sweep_result* r);
/* AIRCOMP_ERR_CONFIG if any row failed on its configuration, else AIRCOMP_ERR_SOLVER
 * if any row failed, else AIRCOMP_OK. */
AIRCOMP_API aircomp_status aircomp_sweep_result_status(const aircomp_sweep_result* r);
AIRCOMP_API aircomp_status aircomp_sweep_result_table(const aircomp_sweep_result* r, aircomp_format format,
                                                      int timing, char** out);
AIRCOMP_API aircomp_status aircomp_sweep_result_summary(const aircomp_sweep_result* r, char** out);
/* Writes one solution record per row (when kept) into an existing directory. */
AIRCOMP_API aircomp_status aircomp_sweep_result_save_solutions(const aircomp_sweep_result* r, const char* dir);
AIRCOMP_API void aircomp_sweep_result_free(aircomp_sweep_result* r);

/* Certification and self-checks. `report` receives a CSV table; `passed` is 1 when
 * every check holds. */
AIRCOMP_API aircomp_status aircomp_oracle_check(const aircomp_config* config, int seeds, int phase_levels,
                                                char** report, int* passed);
AIRCOMP_API aircomp_status aircomp_selftest(char** report, int* passed);

#ifdef __cplusplus
}
#endif

#endif
