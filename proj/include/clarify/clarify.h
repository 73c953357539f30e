/* C interface to the clarify toolkit.
 *
 * Requests and results are UTF-8 JSON strings. Strings returned through an
 * out-parameter are owned by the caller and released with
 * clarify_free_string. On a non-OK status the out-parameter is left NULL and
 * clarify_last_error / clarify_last_error_code describe the failure for the
 * calling thread. */
#ifndef CLARIFY_CLARIFY_H
#define CLARIFY_CLARIFY_H

#include <stddef.h>

#if defined(_WIN32)
#define CLARIFY_API __declspec(dllexport)
#elif defined(__GNUC__)
#define CLARIFY_API __attribute__((visibility("default")))
#else
#define CLARIFY_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clarify_status {
  CLARIFY_OK = 0,
  CLARIFY_ERR_ARGUMENT = 1, /* invalid input, blank statement or answer */
  CLARIFY_ERR_CONFIG = 2,   /* bad configuration or request */
  CLARIFY_ERR_DATA = 3,     /* unreadable or malformed data, nothing to process */
  CLARIFY_ERR_BACKEND = 4,  /* completion backend failed or replied unusably */
  CLARIFY_ERR_NOT_FOUND = 5,
  CLARIFY_ERR_STATE = 6, /* session not in the required state */
  CLARIFY_ERR_STORAGE = 7,
  CLARIFY_ERR_INTERNAL = 8
} clarify_status;

/* Holds a gateway, a session manager and an optional run store. */
typedef struct clarify_engine clarify_engine;

typedef void (*clarify_progress_fn)(size_t done, size_t total, void* user_data);

CLARIFY_API const char* clarify_version(void);

/* Message and symbolic error code ("WrongState", ...) of the calling
 * thread's last failure; empty strings when the last call succeeded. Valid
 * until the next call on the same thread. */
CLARIFY_API const char* clarify_last_error(void);
CLARIFY_API const char* clarify_last_error_code(void);

CLARIFY_API void clarify_free_string(char* s);

/* config_json uses the run configuration keys (backend, model, router,
 * store_dir, cache_dir, retry, ...); NULL or "{}" takes defaults. Sessions
 * route with the LLM router unless "router" is given. */
CLARIFY_API clarify_status clarify_engine_new(const char* config_json, clarify_engine** out);
CLARIFY_API void clarify_engine_free(clarify_engine* engine);

/* Session resources as JSON. */
CLARIFY_API clarify_status clarify_session_begin(clarify_engine* engine, const char* statement,
                                                 char** resource_json);
CLARIFY_API clarify_status clarify_session_answer(clarify_engine* engine, const char* session_id,
                                                  const char* answer, char** resource_json);
CLARIFY_API clarify_status clarify_session_get(clarify_engine* engine, const char* session_id,
                                               char** resource_json);

/* HTTP API over the engine's sessions. options_json: {"host", "port"}; port 0
 * picks a free port. clarify_serve blocks until clarify_serve_stop is called
 * from another thread; clarify_serve_start returns once listening. */
CLARIFY_API clarify_status clarify_serve(clarify_engine* engine, const char* options_json);
CLARIFY_API clarify_status clarify_serve_start(clarify_engine* engine, const char* options_json, int* port);
CLARIFY_API clarify_status clarify_serve_stop(clarify_engine* engine);

/* Batch run of one strategy; returns the report. progress may be NULL. */
CLARIFY_API clarify_status clarify_run(const char* config_json, clarify_progress_fn progress, void* user_data,
                                       char** report_json);

/* Corpus analyses; see the request kinds in the README. */
CLARIFY_API clarify_status clarify_analyze(const char* request_json, char** result_json);

/* Reports for stored runs: {"store_dir", "run_ids"}. */
CLARIFY_API clarify_status clarify_report(const char* request_json, char** result_json);

/* {"TemplateId": "body", ...} */
CLARIFY_API clarify_status clarify_template_catalog(char** catalog_json);

#ifdef __cplusplus
}
#endif

#endif /* CLARIFY_CLARIFY_H */
