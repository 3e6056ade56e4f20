/* SPDX-License-Identifier: Apache-2.0 */
#ifndef FBSDE_FBSDE_H
#define FBSDE_FBSDE_H

#include <stdint.h>

#if defined(_WIN32)
#  if defined(FBSDE_BUILDING_LIBRARY)
#    define FBSDE_API __declspec(dllexport)
#  else
#    define FBSDE_API __declspec(dllimport)
#  endif
#else
#  define FBSDE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status of a library call. Failed checks are not errors; they are reported
 * through the exit code of fbsde_run_stage. */
typedef enum fbsde_status {
    FBSDE_OK = 0,
    FBSDE_ERR_ARGUMENT = 1,  /* null handle, unknown stage, bad option value */
    FBSDE_ERR_CONFIG = 2,    /* schema violation; see fbsde_last_error_pointer */
    FBSDE_ERR_PARSE = 3,     /* coefficient expression did not parse */
    FBSDE_ERR_NUMERICAL = 4, /* solver or simulation failure */
    FBSDE_ERR_IO = 5,
    FBSDE_ERR_INTERNAL = 6
} fbsde_status;

/* Pipeline exit codes returned by fbsde_run_stage. */
enum {
    FBSDE_EXIT_PASS = 0,
    FBSDE_EXIT_ERROR = 1,
    FBSDE_EXIT_CHECK_FAILED = 2,
    FBSDE_EXIT_ASSUMPTION_FAILED = 3
};

/* A loaded run configuration plus output options. */
typedef struct fbsde_run fbsde_run;

FBSDE_API const char* fbsde_version(void);

/* Loads a YAML or JSON config file. On failure *out is set to NULL. */
FBSDE_API fbsde_status fbsde_open(const char* config_path, fbsde_run** out);
/* Same, from config text. */
FBSDE_API fbsde_status fbsde_open_text(const char* config_text, fbsde_run** out);
FBSDE_API void fbsde_close(fbsde_run* run);

FBSDE_API fbsde_status fbsde_set_out_dir(fbsde_run* run, const char* dir);
/* 0 = one worker per logical core. */
FBSDE_API fbsde_status fbsde_set_threads(fbsde_run* run, unsigned threads);
/* Overrides the Monte Carlo seed of the config (and therefore its hash). */
FBSDE_API fbsde_status fbsde_set_seed(fbsde_run* run, uint64_t seed);
/* Empty string disables the solution cache; NULL restores the default. */
FBSDE_API fbsde_status fbsde_set_cache_dir(fbsde_run* run, const char* dir);
/* Command line recorded in the metadata sidecar. */
FBSDE_API fbsde_status fbsde_set_command(fbsde_run* run, const char* command);

/* Runs "check", "solve", "simulate", "bounds" or "verify" (with every earlier
 * stage it needs). *exit_code receives an FBSDE_EXIT_* value; it is
 * FBSDE_EXIT_ERROR whenever the status is not FBSDE_OK. */
FBSDE_API fbsde_status fbsde_run_stage(fbsde_run* run, const char* stage, int* exit_code);

/* Strings owned by the handle, valid until the next call on it. */
FBSDE_API const char* fbsde_summary(const fbsde_run* run);
FBSDE_API const char* fbsde_message(const fbsde_run* run);
FBSDE_API const char* fbsde_config_hash(const fbsde_run* run);
/* Resolved config as canonical JSON. */
FBSDE_API const char* fbsde_resolved_config(const fbsde_run* run);

/* Message and JSON pointer of the last error on the calling thread. */
FBSDE_API const char* fbsde_last_error(void);
FBSDE_API const char* fbsde_last_error_pointer(void);

#ifdef __cplusplus
}
#endif

#endif /* FBSDE_FBSDE_H */
