/*
 * down — adaptive multiagent debate for LLM reasoning, behind a C API.
 *
 * The engine runs an initial model response per query, gates on its
 * confidence score, and engages a confidence-guided multiagent debate only
 * when the model is unsure. Baseline protocols (single CoT, self-refine,
 * self-consistency, full debate, MAD) and an evaluation harness with
 * accuracy / agent-call / skip-rate metrics are included, plus the
 * Wilson-bound threshold selector.
 *
 * Conventions:
 *   - Every fallible function returns a down_status; DOWN_OK is 0.
 *   - On failure, down_last_error() returns a thread-local description.
 *   - Output strings are heap-allocated, NUL-terminated, and owned by the
 *     caller; release them with down_free().
 *   - Handles are opaque; close them with their *_close() function.
 *   - All handle types are safe to use from multiple threads only if each
 *     thread uses its own handle, except batch runs, which parallelize
 *     internally.
 */

#ifndef DOWN_H
#define DOWN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32) && defined(DOWN_SHARED)
#  ifdef DOWN_BUILD
#    define DOWN_API __declspec(dllexport)
#  else
#    define DOWN_API __declspec(dllimport)
#  endif
#else
#  define DOWN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum down_status {
    DOWN_OK = 0,
    DOWN_ERR_INVALID_ARGUMENT = 1,
    DOWN_ERR_CONFIG = 2,   /* bad configuration (CLI exit code 2) */
    DOWN_ERR_DATASET = 3,  /* bad dataset or id mismatch (CLI exit code 3) */
    DOWN_ERR_BACKEND = 4,  /* backend unreachable / failed (CLI exit code 4) */
    DOWN_ERR_PARSE = 5,    /* malformed JSON / JSONL input */
    DOWN_ERR_IO = 6,       /* file system failure */
    DOWN_ERR_INTERNAL = 7
} down_status;

typedef struct down_engine down_engine;
typedef struct down_dataset down_dataset;
typedef struct down_batch down_batch;

/* Library version, static storage. */
DOWN_API const char* down_version(void);

/* Thread-local message for the most recent failure on this thread. */
DOWN_API const char* down_last_error(void);

/* Releases a string returned through a char** out-parameter. */
DOWN_API void down_free(char* ptr);

/* ---- engine ---------------------------------------------------------- */

/* Builds an engine from a JSON config file. Relative script paths inside
 * the config resolve against the config file's directory. */
DOWN_API down_status down_engine_open(const char* config_path, down_engine** out);

/* Same, from an in-memory JSON document. */
DOWN_API down_status down_engine_open_json(const char* config_json, down_engine** out);

/* Runtime override, e.g. ("threshold", "0.9"), ("seed", "42"),
 * ("aggregation", "judge"), ("backend", "<tag>"), ("max_inflight", "8"). */
DOWN_API down_status down_engine_set(down_engine* engine, const char* key, const char* value);

/* Effective engine configuration as a JSON document. */
DOWN_API down_status down_engine_config_json(const down_engine* engine, char** out);

DOWN_API void down_engine_close(down_engine* engine);

/* ---- datasets -------------------------------------------------------- */

/* Loads a JSONL dataset of {id, text, choices?, gold} objects. */
DOWN_API down_status down_dataset_open(const char* jsonl_path, down_dataset** out);

DOWN_API size_t down_dataset_size(const down_dataset* dataset);

DOWN_API void down_dataset_close(down_dataset* dataset);

/* ---- runs ------------------------------------------------------------ */

/* Runs a protocol over the dataset. Protocols: down, single-cot,
 * self-refine, self-consistency, debate, mad, conditional:debate,
 * conditional:mad. Individual backend failures are recorded per transcript;
 * the batch itself still succeeds. Returns DOWN_ERR_BACKEND only when every
 * transcript failed. */
DOWN_API down_status down_run(down_engine* engine, const down_dataset* dataset,
                              const char* protocol, down_batch** out);

/* One JSON object per line, in dataset order. */
DOWN_API down_status down_batch_transcripts_jsonl(const down_batch* batch, char** out);

/* {"accuracy", "avg_agent_calls", "skip_rate", "n", "failures"}. Requires
 * gold answers in the dataset. */
DOWN_API down_status down_batch_metrics_json(const down_batch* batch, char** out);

/* Human-readable metrics table. */
DOWN_API down_status down_batch_metrics_table(const down_batch* batch, char** out);

DOWN_API void down_batch_close(down_batch* batch);

/* ---- threshold selection --------------------------------------------- */

/* Sweeps the config's candidate thresholds over the dataset: the initial
 * turn runs once per query, the gate is replayed per candidate, and the
 * debate continuation is generated at most once per query. Returns a JSON
 * array of {theta, k, m, N} rows. */
DOWN_API down_status down_sweep(down_engine* engine, const down_dataset* dataset, char** out);

/* Scores {theta,k,m,N} rows with the engine's selection parameters and
 * returns {"theta_star", "wilson_bound", "scores": [...]}. */
DOWN_API down_status down_select_threshold(const down_engine* engine, const char* stats_json,
                                           char** out);

/* ---- analysis -------------------------------------------------------- */

/* Response-shift report over a saved transcripts file:
 * {"changed", "correct_to_incorrect", "incorrect_to_correct",
 *  "pct_c2i", "pct_i2c"}. */
DOWN_API down_status down_shift_report(const char* transcripts_path, const char* dataset_path,
                                       char** out);

/* ---- primitives ------------------------------------------------------ */

/* One-sided Wilson lower bound on a binomial proportion with normal
 * quantile z. */
DOWN_API down_status down_wilson_lower_bound(int64_t k, int64_t n, double z, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* DOWN_H */
