#ifndef DOSEOPT_DOSEOPT_H
#define DOSEOPT_DOSEOPT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(DOSEOPT_BUILDING)
#    define DOSEOPT_API __declspec(dllexport)
#  else
#    define DOSEOPT_API __declspec(dllimport)
#  endif
#else
#  define DOSEOPT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum doseopt_status {
    DOSEOPT_OK = 0,
    DOSEOPT_ERR_ARGUMENT = 1,
    DOSEOPT_ERR_CONFIG = 2,
    DOSEOPT_ERR_DEGENERATE = 3,
    DOSEOPT_ERR_INSUFFICIENT_DATA = 4,
    DOSEOPT_ERR_NON_INVERTIBLE = 5,
    DOSEOPT_ERR_POLICY = 6,
    DOSEOPT_ERR_IO = 7,
    DOSEOPT_ERR_INTERNAL = 8
} doseopt_status;

typedef enum doseopt_format {
    DOSEOPT_FORMAT_TABLE = 0,
    DOSEOPT_FORMAT_CSV = 1,
    DOSEOPT_FORMAT_JSON = 2
} doseopt_format;

/* Stage-1 decision codes, ordered from most to least conservative. */
typedef enum doseopt_decision {
    DOSEOPT_DEESCALATE_EXCLUDE = 0,
    DOSEOPT_DEESCALATE = 1,
    DOSEOPT_STAY = 2,
    DOSEOPT_ESCALATE = 3
} doseopt_decision;

typedef struct doseopt_session doseopt_session;

DOSEOPT_API const char* doseopt_version(void);
DOSEOPT_API const char* doseopt_status_name(doseopt_status status);

DOSEOPT_API doseopt_status doseopt_session_create(doseopt_session** out);
DOSEOPT_API void doseopt_session_destroy(doseopt_session* session);

/* Message and offending config key of the last failure; "" when none.
   Valid until the next call on the same session. */
DOSEOPT_API const char* doseopt_last_error(const doseopt_session* session);
DOSEOPT_API const char* doseopt_last_error_key(const doseopt_session* session);

/* Parses a JSON run configuration. Relative paths resolve against base_dir
   (may be NULL). expected_step may be NULL; otherwise the config's step must match. */
DOSEOPT_API doseopt_status doseopt_load_config(doseopt_session* session, const char* json_text,
                                               const char* base_dir, const char* expected_step);

DOSEOPT_API doseopt_status doseopt_set_seed(doseopt_session* session, uint64_t seed);
DOSEOPT_API doseopt_status doseopt_set_threads(doseopt_session* session, unsigned threads);

/* Runs the loaded step. *out points into session-owned memory that stays
   valid until the next run or destroy. */
DOSEOPT_API doseopt_status doseopt_run(doseopt_session* session, doseopt_format format, const char** out,
                                       size_t* out_len);

/* Output path from the config, or "" when results go to stdout. */
DOSEOPT_API const char* doseopt_output_path(const doseopt_session* session);

/* Host and port from a loaded serve config. */
DOSEOPT_API doseopt_status doseopt_serve_address(const doseopt_session* session, const char** host, int* port);

/* Routes one HTTP request through the stateless API handler. */
DOSEOPT_API doseopt_status doseopt_handle_request(doseopt_session* session, const char* method, const char* path,
                                                  const char* body, size_t body_len, int* http_status,
                                                  const char** out, size_t* out_len);

DOSEOPT_API doseopt_status doseopt_beta_interval_prob(double alpha, double beta, double lo, double hi,
                                                      double* out);

DOSEOPT_API doseopt_status doseopt_stage1_decision(uint32_t treated, uint32_t dlt, double target,
                                                   double epsilon1, double epsilon2, double gamma,
                                                   doseopt_decision* out);

#ifdef __cplusplus
}
#endif

#endif
