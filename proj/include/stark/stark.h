#ifndef STARK_STARK_H
#define STARK_STARK_H

/* C interface to the stark library. Every function returns a status code;
   on failure the thread-local last-error accessors describe the cause. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define STARK_API __attribute__((visibility("default")))
#else
#define STARK_API
#endif

typedef enum {
  STARK_OK = 0,
  STARK_CHECK_FAILED = 1, /* verify-all ran and at least one check failed */
  STARK_CONFIG_ERROR = 2,
  STARK_BUDGET_ERROR = 3,
  STARK_DOMAIN_ERROR = 4
} stark_status;

typedef struct stark_config stark_config;

STARK_API const char* stark_version(void);

/* Last error on the calling thread; empty strings when there is none. */
STARK_API const char* stark_last_error(void);
STARK_API const char* stark_last_error_module(void);
STARK_API const char* stark_last_error_operation(void);
STARK_API const char* stark_last_error_budget(void);

/* Run configurations. */
STARK_API stark_status stark_config_new(stark_config** out);
STARK_API stark_status stark_config_load(const char* path, stark_config** out);
STARK_API stark_status stark_config_from_json(const char* text, stark_config** out);
/* Dotted-path override; value is JSON text or a bare string. */
STARK_API stark_status stark_config_set(stark_config* config, const char* key, const char* value);
/* Writes the merged configuration; release with stark_string_free. */
STARK_API stark_status stark_config_dump(const stark_config* config, char** out);
STARK_API void stark_config_free(stark_config* config);

STARK_API size_t stark_subcommand_count(void);
STARK_API const char* stark_subcommand_name(size_t index);

/* Runs a subcommand, writing artifacts to the configured output_dir. The
   one-line JSON summary is returned in *summary for every status; release it
   with stark_string_free. */
STARK_API stark_status stark_run(const stark_config* config, const char* subcommand, char** summary);

STARK_API void stark_string_free(char* s);

/* Closed-form special functions. */
STARK_API stark_status stark_airy_ai(double u, double* out);
STARK_API stark_status stark_c1_constant(double alpha, double* out);
STARK_API stark_status stark_c2_constant(int d, double alpha, double* re, double* im);

#ifdef __cplusplus
}
#endif

#endif
