#ifndef FOUNTAIN_H
#define FOUNTAIN_H

/* C interface to the fountain solver. Every call returns a fountain_status;
 * on failure fountain_last_error() holds the message for the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define FOUNTAIN_API __declspec(dllexport)
#else
#define FOUNTAIN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum fountain_status {
  FOUNTAIN_OK = 0,
  FOUNTAIN_E_INVALID_ARGUMENT = 1,
  FOUNTAIN_E_UNSUPPORTED_DOMAIN = 2,
  FOUNTAIN_E_BASIS_MISMATCH = 3,
  FOUNTAIN_E_SIZE_MISMATCH = 4,
  FOUNTAIN_E_EMPTY_TAIL = 5,
  FOUNTAIN_E_OUT_OF_RANGE = 6,
  FOUNTAIN_E_ASSUMPTION = 7,
  FOUNTAIN_E_BRACKETING = 8,
  FOUNTAIN_E_SIZE_CAP = 9,
  FOUNTAIN_E_NON_FINITE = 10,
  FOUNTAIN_E_CONFIG = 11,
  FOUNTAIN_E_IO = 12,
  FOUNTAIN_E_NULL = 13,
  FOUNTAIN_E_INTERNAL = 99
} fountain_status;

/* Process exit codes produced by fountain_run. */
enum {
  FOUNTAIN_EXIT_OK = 0,
  FOUNTAIN_EXIT_CHECK_FAILURE = 1,
  FOUNTAIN_EXIT_GEOMETRY_FAILURE = 2,
  FOUNTAIN_EXIT_PARTIAL = 3,
  FOUNTAIN_EXIT_VALIDATION = 4
};

typedef struct fountain_config fountain_config;
typedef struct fountain_model fountain_model;

/* Receives one log line without its newline; `user` is passed through. */
typedef void (*fountain_log_fn)(const char *line, void *user);

FOUNTAIN_API const char *fountain_version(void);
FOUNTAIN_API const char *fountain_status_name(int status);
/* Valid until the next failing call on the same thread. */
FOUNTAIN_API const char *fountain_last_error(void);

FOUNTAIN_API int fountain_config_load(const char *path, fountain_config **out);
FOUNTAIN_API int fountain_config_parse(const char *text, fountain_config **out);
FOUNTAIN_API void fountain_config_free(fountain_config *config);
FOUNTAIN_API int fountain_config_set_seed(fountain_config *config, uint64_t seed);
FOUNTAIN_API int fountain_config_set_output(fountain_config *config, const char *dir);
FOUNTAIN_API int fountain_config_set_jobs(fountain_config *config, int jobs);
FOUNTAIN_API int fountain_config_set_mirror(fountain_config *config, int mirror);
FOUNTAIN_API int fountain_config_set_sign_error(fountain_config *config, int inject);
FOUNTAIN_API int fountain_config_set_k_list(fountain_config *config, const int *ks, size_t count);
/* Writes the configuration as JSON into buf; *needed receives the full size
 * including the terminator, so a first call with size 0 measures. */
FOUNTAIN_API int fountain_config_to_json(const fountain_config *config, char *buf, size_t size,
                                         size_t *needed);

/* Runs "spectrum", "geometry", "solve" or "check". A NULL log writes to
 * stdout. Validation failures are not errors: they set *exit_code to
 * FOUNTAIN_EXIT_VALIDATION and return FOUNTAIN_OK. */
FOUNTAIN_API int fountain_run(const char *command, const fountain_config *config,
                              fountain_log_fn log, void *user, int *exit_code);

/* Split-coordinate access to the energy of a validated configuration. */
FOUNTAIN_API int fountain_model_create(const fountain_config *config, fountain_model **out);
FOUNTAIN_API void fountain_model_free(fountain_model *model);
FOUNTAIN_API int fountain_model_dimension(const fountain_model *model, size_t *out);
FOUNTAIN_API int fountain_model_phi(const fountain_model *model, const double *coords, size_t n,
                                    double *phi);
FOUNTAIN_API int fountain_model_grad(const fountain_model *model, const double *coords, size_t n,
                                     double *grad);
/* Minimax critical point for one k; coords may be NULL, otherwise it must
 * hold fountain_model_dimension values. */
FOUNTAIN_API int fountain_model_solve(const fountain_model *model, int k, double *level,
                                      double *cerami, int *converged, double *coords, size_t n);

/* Stored level of a solution file and the level recomputed from its echoed
 * configuration. */
FOUNTAIN_API int fountain_solution_levels(const char *path, double *stored, double *recomputed);

#ifdef __cplusplus
}
#endif

#endif
