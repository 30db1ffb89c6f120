#ifndef RENYI_RENYI_H
#define RENYI_RENYI_H

/*
 * C interface to the renyi library: experiment configs and runs, standalone
 * dependence estimates and the arctan-scenario oracle.
 *
 * Every function returns a renyi_status. On failure the message is available
 * from renyi_last_error() on the same thread until the next failing call.
 * Handles are opaque and must be released with their matching _free call.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RENYI_API __declspec(dllexport)
#else
#define RENYI_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum renyi_status {
  RENYI_OK = 0,
  RENYI_ERR_CONFIG = 1,
  RENYI_ERR_RUN = 2,
  RENYI_ERR_INVALID_ARGUMENT = 3,
  RENYI_ERR_SHAPE = 4,
  RENYI_ERR_NUMERIC = 5,
  RENYI_ERR_IO = 6,
  RENYI_ERR_INTERNAL = 7
} renyi_status;

typedef struct renyi_config renyi_config;
typedef struct renyi_records renyi_records;

typedef struct renyi_estimate_result {
  double estimate;
  double raw_estimate;
  size_t n;
  int degenerate;
  int bins_merged;
  int ridge_added;
} renyi_estimate_result;

typedef struct renyi_oracle_result {
  double lower;
  double upper;
  double monte_carlo;
} renyi_oracle_result;

RENYI_API const char* renyi_version(void);
RENYI_API const char* renyi_last_error(void);
RENYI_API const char* renyi_status_name(renyi_status status);

/* Configs. */
RENYI_API renyi_status renyi_config_load(const char* path, renyi_config** out);
RENYI_API renyi_status renyi_config_parse(const char* yaml_text, renyi_config** out);
RENYI_API renyi_status renyi_config_preset(const char* name, renyi_config** out);
RENYI_API void renyi_config_free(renyi_config* cfg);
RENYI_API renyi_status renyi_config_set_seeds(renyi_config* cfg, const uint64_t* seeds, size_t count);
RENYI_API renyi_status renyi_config_set_output_dir(renyi_config* cfg, const char* dir);
/* The returned pointer stays valid until the config is modified or freed. */
RENYI_API renyi_status renyi_config_output_dir(const renyi_config* cfg, const char** dir);
RENYI_API renyi_status renyi_config_fingerprint(const renyi_config* cfg, uint64_t* out);
/* Caller releases *yaml_text with renyi_string_free. */
RENYI_API renyi_status renyi_config_serialize(const renyi_config* cfg, char** yaml_text);
RENYI_API void renyi_string_free(char* text);

/* Experiments. A run that aborts is recorded as failed; renyi_run itself
 * fails only when the grid cannot start. */
RENYI_API renyi_status renyi_run(const renyi_config* cfg, renyi_records** out);
RENYI_API size_t renyi_records_count(const renyi_records* records);
RENYI_API size_t renyi_records_failed(const renyi_records* records);
/* Error text of record `index`, or "" when it succeeded. */
RENYI_API renyi_status renyi_records_error(const renyi_records* records, size_t index, const char** message);
RENYI_API renyi_status renyi_records_emit(const renyi_records* records, const renyi_config* cfg, const char* dir);
RENYI_API void renyi_records_free(renyi_records* records);

/* Dependence between u (n x du) and v (n x dv), both row-major.
 * estimator: "nn", "kde", "rdc", "mine" or "pearson". */
RENYI_API renyi_status renyi_estimate(const double* u, size_t n, size_t du, const double* v, size_t dv,
                                      const char* estimator, uint64_t seed, renyi_estimate_result* out);
/* Same, reading comma-separated column lists from a headed CSV file. */
RENYI_API renyi_status renyi_estimate_csv(const char* path, const char* u_columns, const char* v_columns,
                                          const char* estimator, uint64_t seed, renyi_estimate_result* out);

/* Analytic bounds on rho(E(Y|X), Y) for the arctan scenario and a Monte-Carlo
 * value from n_mc draws. */
RENYI_API renyi_status renyi_oracle_arctan(double alpha, size_t n_mc, uint64_t seed, renyi_oracle_result* out);

#ifdef __cplusplus
}
#endif

#endif
