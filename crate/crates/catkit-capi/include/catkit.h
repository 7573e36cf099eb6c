#ifndef CATKIT_H
#define CATKIT_H

/* Generated by cbindgen from the catkit-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum {
  CATKIT_OK = 0,
  CATKIT_ERR_NULL_ARGUMENT = 1,
  CATKIT_ERR_INVALID_UTF8 = 2,
  CATKIT_ERR_IO = 3,
  CATKIT_ERR_FORMAT = 4,
  CATKIT_ERR_VERSION_MISMATCH = 5,
  CATKIT_ERR_CORRUPT = 6,
  CATKIT_ERR_INTERNAL = 7,
} CatkitStatus;

/**
 * Opaque handle over a loaded scorer model.
 */
typedef struct CatkitScorer CatkitScorer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *catkit_version(void);

/**
 * Most recent error message on this thread (empty string when none).
 * The pointer stays valid until the next failing call on this thread.
 */
const char *catkit_last_error_message(void);

/**
 * Loads a scorer model file (linear model or concept index, dispatched by
 * file magic). On success writes a handle to `out_scorer`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out_scorer` a valid pointer.
 */
CatkitStatus catkit_scorer_open(const char *path, CatkitScorer **out_scorer);

/**
 * Model kind of a handle: "linear" or "esa" (static string).
 *
 * # Safety
 * `scorer` must be a live handle from `catkit_scorer_open`.
 */
const char *catkit_scorer_kind(const CatkitScorer *scorer);

/**
 * Scores one category-document pair; higher means the category describes
 * the document better. Writes the score to `out_score`.
 *
 * # Safety
 * `scorer` must be a live handle; strings NUL-terminated; `out_score` valid.
 */
CatkitStatus catkit_scorer_score(const CatkitScorer *scorer,
                                 const char *category,
                                 const char *document,
                                 double *out_score);

/**
 * Scores one category against `count` documents, writing `count` scores to
 * `out_scores`.
 *
 * # Safety
 * `documents` must point at `count` NUL-terminated strings and `out_scores`
 * at `count` writable doubles.
 */
CatkitStatus catkit_scorer_score_batch(const CatkitScorer *scorer,
                                       const char *category,
                                       const char *const *documents,
                                       uintptr_t count,
                                       double *out_scores);

/**
 * Releases a handle. Passing NULL is a no-op.
 *
 * # Safety
 * `scorer` must come from `catkit_scorer_open` and not be freed twice.
 */
void catkit_scorer_free(CatkitScorer *scorer);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CATKIT_H */
