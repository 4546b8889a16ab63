#ifndef RTS_RTS_H
#define RTS_RTS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RTS_BUILDING_LIBRARY)
#    define RTS_API __declspec(dllexport)
#  else
#    define RTS_API __declspec(dllimport)
#  endif
#else
#  define RTS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. RTS_OK is zero; every other value names a failure kind. */
typedef enum rts_status {
  RTS_OK = 0,
  RTS_MALFORMED_INPUT,
  RTS_SCHEMA_VIOLATION,
  RTS_UNKNOWN_RELEASE,
  RTS_SCOPE_MISMATCH,
  RTS_DIMENSION_MISMATCH,
  RTS_DEGENERATE_LABELS,
  RTS_UNKNOWN_TEST_ID,
  RTS_EMPTY_SUITE,
  RTS_CUTOFF_OUTSIDE_INTERVAL,
  RTS_INADEQUATE_RANKING,
  RTS_NO_FAULTS,
  RTS_ILLEGAL_TRANSITION,
  RTS_PAYLOAD_INVALID,
  RTS_NOT_FOUND,
  RTS_STORE_CORRUPT,
  RTS_CONFLICT,
  RTS_ITERATION_LIMIT,
  RTS_INVALID_ARGUMENT,
  RTS_IO_ERROR,
  RTS_INTERNAL
} rts_status;

typedef struct rts_dataset rts_dataset;
typedef struct rts_service rts_service;

RTS_API const char* rts_version(void);

/* Error code name, e.g. "UnknownRelease". Static storage. */
RTS_API const char* rts_status_name(rts_status status);

/* Message of the last failed call on this thread; "" when none. Valid until
   the next call on the same thread. */
RTS_API const char* rts_last_error(void);

/* Strings returned through `char** out` are owned by the caller. */
RTS_API void rts_string_free(char* s);

/* Datasets */
RTS_API rts_status rts_dataset_load_file(const char* path, rts_dataset** out);
RTS_API rts_status rts_dataset_load_buffer(const char* data, size_t len, rts_dataset** out);
RTS_API void rts_dataset_free(rts_dataset* ds);

/* Validation report as text (as_json = 0) or JSON. `corrupt` may be NULL. */
RTS_API rts_status rts_dataset_validate(const rts_dataset* ds, int as_json, char** out,
                                        int* corrupt);

/* Canonical JSON form of the dataset. */
RTS_API rts_status rts_dataset_serialize(const rts_dataset* ds, char** out);

/* Runs a backtest. options_json is a JSON object:
     releases: [string]           required
     trials: int                  random-baseline trials, 0 (default) disables
     seed: int
     window: int                  prior releases used for labels, default 2
     deselected_groups: [string]
     train: {learning_rate, max_epochs, l2_lambda, tolerance}
   The rendered report goes to `out` as a table or JSON. `evaluated` and
   `skipped` receive the release counts and may be NULL. */
RTS_API rts_status rts_backtest(const rts_dataset* ds, const char* options_json, int as_json,
                                char** out, size_t* evaluated, size_t* skipped);

/* Generated corpora: kind is "planted" or "shuffled". Writes dataset JSON. */
RTS_API rts_status rts_fixture_generate(const char* kind, uint64_t seed, char** out);

/* HTTP service core. config_json may be NULL for defaults. */
RTS_API rts_status rts_service_open(const char* config_json, rts_service** out);
RTS_API void rts_service_free(rts_service* svc);

/* Effective configuration as JSON. */
RTS_API rts_status rts_service_config(const rts_service* svc, char** out);

/* Handles one request. query is an application/x-www-form-urlencoded string
   or NULL; actor may be NULL. The response status goes to *http_status and
   the JSON body to *out. Returns RTS_OK whenever a response was produced,
   including error responses. Safe to call from several threads. */
RTS_API rts_status rts_service_handle(rts_service* svc, const char* method, const char* path,
                                      const char* query, const char* body, size_t body_len,
                                      const char* actor, int* http_status, char** out);

/* Export document of an accepted session in a session store directory. */
RTS_API rts_status rts_session_export(const char* store_dir, const char* session_id,
                                      char** out);

#ifdef __cplusplus
}
#endif

#endif
