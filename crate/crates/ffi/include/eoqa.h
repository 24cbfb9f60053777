#ifndef EOQA_H
#define EOQA_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

/**
 * Run the generated query and include answers.
 */
#define EOQA_EXECUTE 1

/**
 * Include the parse, annotations and generation notes.
 */
#define EOQA_TRACE 2

/**
 * Result of every fallible call.
 */
typedef enum EoqaStatus {
  EOQA_STATUS_OK = 0,
  EOQA_STATUS_NULL_ARGUMENT = 1,
  EOQA_STATUS_INVALID_UTF8 = 2,
  EOQA_STATUS_LOAD_FAILED = 3,
  EOQA_STATUS_EMPTY_QUESTION = 4,
  EOQA_STATUS_ASK_FAILED = 5,
  EOQA_STATUS_PANIC = 6,
} EoqaStatus;

/**
 * Opaque engine handle.
 */
typedef struct EoqaEngine EoqaEngine;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Loads every `.nt` file in `kg_dir`. `materialized` may be NULL, in which
 * case spatial relations are computed. On success `*out` receives a handle
 * to release with [`eoqa_engine_free`]; on failure it is set to NULL.
 *
 * # Safety
 * String arguments must be NUL-terminated; `out` must be writable.
 */
enum EoqaStatus eoqa_engine_load(const char *kg_dir,
                                 const char *materialized,
                                 struct EoqaEngine **out);

/**
 * Releases an engine. NULL is ignored.
 *
 * # Safety
 * `engine` must come from [`eoqa_engine_load`] and not be used afterwards.
 */
void eoqa_engine_free(struct EoqaEngine *engine);

/**
 * Answers one question. `flags` combines [`EOQA_EXECUTE`] and
 * [`EOQA_TRACE`]. `*out_json` receives the response, or `{"error": ...}`
 * when the status is not `Ok`; free it with [`eoqa_string_free`].
 *
 * # Safety
 * `engine` must be a live handle, `question` NUL-terminated and `out_json`
 * writable.
 */
enum EoqaStatus eoqa_ask(const struct EoqaEngine *engine,
                         const char *question,
                         uint32_t flags,
                         char **out_json);

/**
 * Number of triples in the loaded knowledge graph, 0 for NULL.
 *
 * # Safety
 * `engine` must be NULL or a live handle.
 */
size_t eoqa_engine_triple_count(const struct EoqaEngine *engine);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void eoqa_string_free(char *s);

/**
 * Static description of a status code.
 */
const char *eoqa_status_message(enum EoqaStatus status);

/**
 * Library version, e.g. `0.1.0`.
 */
const char *eoqa_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EOQA_H */
