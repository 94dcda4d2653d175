#ifndef CPFYM_H
#define CPFYM_H

/* C interface to the verification suites. Handles are opaque; every call that
   can fail returns a cpfym_status and leaves a message in cpfym_last_error(). */

#include <stddef.h>

#if defined(_WIN32)
#define CPFYM_API __declspec(dllexport)
#else
#define CPFYM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef struct cpfym_config cpfym_config;
typedef struct cpfym_report cpfym_report;

typedef enum {
  CPFYM_OK = 0,
  CPFYM_ERR_ARGUMENT = 1, /* null handle or out-of-range index */
  CPFYM_ERR_CONFIG = 2,   /* invalid key, value or combination */
  CPFYM_ERR_IO = 3,       /* unreadable config file */
  CPFYM_ERR_INTERNAL = 4
} cpfym_status;

typedef enum { CPFYM_FORMAT_JSON = 0, CPFYM_FORMAT_TEXT = 1 } cpfym_format;

typedef enum { CPFYM_CHECK_PASS = 0, CPFYM_CHECK_FAIL = 1, CPFYM_CHECK_SKIP = 2, CPFYM_CHECK_INFO = 3 } cpfym_check_status;

typedef struct {
  size_t pass, fail, skip, info;
} cpfym_counts;

/* Strings point into the report and live until cpfym_report_free. */
typedef struct {
  const char* id;
  const char* suite;
  const char* tag;
  const char* description;
  const char* comparison; /* abs, rel, max, min or none */
  const char* detail;
  double value; /* NaN when the check raised an error */
  double expected;
  double tolerance;
  double seconds;
  cpfym_check_status status;
} cpfym_check;

CPFYM_API const char* cpfym_version(void);
/* Message and offending config field of the last failure on this thread. */
CPFYM_API const char* cpfym_last_error(void);
CPFYM_API const char* cpfym_last_error_field(void);
/* Worker threads used by the suites (CPFYM_THREADS, else hardware). */
CPFYM_API int cpfym_thread_count(void);

CPFYM_API cpfym_status cpfym_config_new(cpfym_config** out);
CPFYM_API void cpfym_config_free(cpfym_config* config);
/* The next three apply on top of the current settings. */
CPFYM_API cpfym_status cpfym_config_load_file(cpfym_config* config, const char* path);
CPFYM_API cpfym_status cpfym_config_parse(cpfym_config* config, const char* text);
CPFYM_API cpfym_status cpfym_config_set(cpfym_config* config, const char* key, const char* value);
CPFYM_API cpfym_status cpfym_config_validate(const cpfym_config* config);

CPFYM_API cpfym_status cpfym_run(const cpfym_config* config, cpfym_report** out);
CPFYM_API void cpfym_report_free(cpfym_report* report);
CPFYM_API size_t cpfym_report_size(const cpfym_report* report);
CPFYM_API cpfym_status cpfym_report_check(const cpfym_report* report, size_t index, cpfym_check* out);
CPFYM_API cpfym_status cpfym_report_find(const cpfym_report* report, const char* id, cpfym_check* out);
CPFYM_API cpfym_status cpfym_report_counts(const cpfym_report* report, cpfym_counts* out);
/* Renders the report; free the result with cpfym_string_free. Timings add
   per-check wall time and make the output run-dependent. */
CPFYM_API cpfym_status cpfym_report_render(const cpfym_report* report, cpfym_format format, int timings, char** out);
CPFYM_API void cpfym_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* CPFYM_H */
