/* C interface to the silico pipeline toolkit.
 *
 * Every fallible call returns a silico_status; on failure the message is
 * available from silico_last_error() on the same thread until the next call.
 * Strings handed out through char** parameters are owned by the caller and
 * released with silico_free_string().
 */
#ifndef SILICO_SILICO_H
#define SILICO_SILICO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SILICO_API __declspec(dllexport)
#else
#define SILICO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values match the CLI exit codes. */
typedef enum silico_status {
  SILICO_OK = 0,
  SILICO_ERR_USAGE = 1,
  SILICO_ERR_MISSING_INPUT = 2,
  SILICO_ERR_VALIDATION = 3,
  SILICO_ERR_PROVIDER = 4,
  SILICO_ERR_IO = 5,
  SILICO_ERR_INTERNAL = 6
} silico_status;

typedef struct silico_config silico_config;
typedef struct silico_fixture silico_fixture;

SILICO_API const char* silico_version(void);
SILICO_API const char* silico_last_error(void);
SILICO_API void silico_free_string(char* s);

/* Run configuration. Keys are dotted ("cluster.k_max"); see silico_config_dump. */
SILICO_API silico_status silico_config_create(silico_config** out);
SILICO_API void silico_config_destroy(silico_config* cfg);
SILICO_API silico_status silico_config_load_env(silico_config* cfg);
SILICO_API silico_status silico_config_load_file(silico_config* cfg, const char* path);
SILICO_API silico_status silico_config_set(silico_config* cfg, const char* key, const char* value);
SILICO_API silico_status silico_config_get(const silico_config* cfg, const char* key, char** out);
SILICO_API silico_status silico_config_dump(const silico_config* cfg, char** out_json);

/* Stages: crawl, preprocess, embed, cluster, project, ngrams, render,
 * discover, review, report. `cached` (optional) is set to 1 when the stage
 * found matching outputs and did nothing. */
SILICO_API silico_status silico_run_stage(const silico_config* cfg, const char* stage, int* cached);
/* Runs every stage in order. `summary_json` (optional) lists each stage and
 * whether it was reused. */
SILICO_API silico_status silico_run_pipeline(const silico_config* cfg, char** summary_json);

/* Synthetic platform. `spec` is a built-in name ("eight-themes",
 * "paper-shape") or a path to a JSON corpus spec. */
SILICO_API silico_status silico_fixture_generate(const char* spec, const char* out_dir, char** summary_json);
/* options_json (may be NULL): {"host", "port", "page_size", "fail_from_page",
 * "throttle_first_n", "raw_records": [...]} */
SILICO_API silico_status silico_fixture_serve(const char* spec, const char* options_json, silico_fixture** out);
SILICO_API int silico_fixture_port(const silico_fixture* fx);
SILICO_API silico_status silico_fixture_request_log(const silico_fixture* fx, char** out_json);
SILICO_API silico_status silico_fixture_manifest(const silico_fixture* fx, char** out_json);
SILICO_API void silico_fixture_stop(silico_fixture* fx);
/* Blocks until the fixture stops, e.g. via GET /__fixture/shutdown. */
SILICO_API void silico_fixture_wait(silico_fixture* fx);
SILICO_API void silico_fixture_destroy(silico_fixture* fx);

/* Analysis primitives on caller-owned row-major buffers. */
SILICO_API silico_status silico_prompt_render(size_t k, char** out);
SILICO_API silico_status silico_kmeans_fit(const double* rows, size_t n, size_t dim, size_t k, size_t restarts,
                                           uint64_t seed, uint32_t* assignments, double* wcss);
SILICO_API silico_status silico_adjusted_rand_index(const int64_t* a, const int64_t* b, size_t n, double* out);
SILICO_API silico_status silico_tsne_run(const double* rows, size_t n, size_t dim, double perplexity,
                                         size_t iterations, uint64_t seed, double* points, double* final_kl);

#ifdef __cplusplus
}
#endif

#endif /* SILICO_SILICO_H */
