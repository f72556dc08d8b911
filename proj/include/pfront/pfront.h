#ifndef PFRONT_PFRONT_H
#define PFRONT_PFRONT_H

/* C interface to the pulsating-front library. All handles are opaque and
   owned by the caller; every function returning pf_status records a message
   retrievable with pf_last_error() on the calling thread. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PF_API __declspec(dllexport)
#else
#define PF_API __attribute__((visibility("default")))
#endif

typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_CONFIG = 1,       /* bad or missing configuration key */
  PF_ERR_PRECONDITION = 2, /* input violates a documented precondition */
  PF_ERR_NUMERICAL = 3,    /* solver failed to converge or diverged */
  PF_ERR_IO = 4,
  PF_ERR_INVALID_ARG = 5,  /* null handle, index out of range, ... */
  PF_ERR_INTERNAL = 6
} pf_status;

typedef struct pf_config pf_config;
typedef struct pf_result pf_result;
typedef struct pf_front pf_front;

typedef enum pf_front_status {
  PF_FRONT_PROPAGATING = 0,
  PF_FRONT_STATIONARY = 1,
  PF_FRONT_INCONCLUSIVE = 2
} pf_front_status;

PF_API const char* pf_version(void);
PF_API const char* pf_status_string(pf_status s);
/* Message of the last failing call on this thread; "" if none. */
PF_API const char* pf_last_error(void);
/* Key of the last PF_ERR_CONFIG on this thread; "" otherwise. */
PF_API const char* pf_last_error_key(void);

/* Config key reference, one line per key. */
PF_API const char* pf_config_help(void);
PF_API size_t pf_scenario_count(void);
PF_API const char* pf_scenario_name(size_t i);

/* scenario may be NULL or "" to take run.scenario from the text. */
PF_API pf_status pf_config_parse(const char* ini_text, const char* scenario, pf_config** out);
PF_API pf_status pf_config_load(const char* path, const char* scenario, pf_config** out);
PF_API void pf_config_free(pf_config* cfg);
PF_API pf_status pf_config_set(pf_config* cfg, const char* section, const char* key,
                               const char* value);
/* Pointers stay valid until the config is modified or freed. */
PF_API const char* pf_config_get(const pf_config* cfg, const char* section, const char* key);
PF_API const char* pf_config_scenario(const pf_config* cfg);
PF_API const char* pf_config_hash(const pf_config* cfg);

/* Runs the configured scenario, writing artifacts under out_dir. A result
   handle is produced whenever the status is not PF_ERR_INVALID_ARG, so the
   summary can be read even after a failure. */
PF_API pf_status pf_run(const pf_config* cfg, const char* out_dir, pf_result** out);
PF_API void pf_result_free(pf_result* r);
/* 0 ok, 1 numerical or precondition failure, 2 configuration error. */
PF_API int pf_result_exit_code(const pf_result* r);
PF_API size_t pf_result_summary_count(const pf_result* r);
PF_API const char* pf_result_summary_line(const pf_result* r, size_t i);
PF_API size_t pf_result_artifact_count(const pf_result* r);
PF_API const char* pf_result_artifact(const pf_result* r, size_t i);
PF_API const char* pf_result_error(const pf_result* r);

/* Computes a front for the instance and numerics of cfg, ignoring scenario. */
PF_API pf_status pf_front_compute(const pf_config* cfg, pf_front** out);
PF_API void pf_front_free(pf_front* f);
PF_API pf_front_status pf_front_get_status(const pf_front* f);
PF_API double pf_front_speed(const pf_front* f);
PF_API double pf_front_speed_uncertainty(const pf_front* f);
PF_API double pf_front_period(const pf_front* f);
PF_API double pf_front_pulsating_defect(const pf_front* f);
PF_API void pf_front_lattice_size(const pf_front* f, size_t* n_xi, size_t* n_y);
/* phi(xi, y), y taken modulo 1; 1 and 0 beyond the lattice ends. */
PF_API pf_status pf_front_value(const pf_front* f, double xi, double y, double* value);
/* Copies the lattice row-major (xi outer) into buf of length n_xi * n_y. */
PF_API pf_status pf_front_lattice(const pf_front* f, double* xi, double* phi, size_t n_xi,
                                  size_t n_y);

#ifdef __cplusplus
}
#endif

#endif
