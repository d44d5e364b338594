#ifndef VALIGN_H
#define VALIGN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum ValignStatus {
  VALIGN_STATUS_OK = 0,
  VALIGN_STATUS_NULL_POINTER = 1,
  VALIGN_STATUS_INVALID_UTF8 = 2,
  VALIGN_STATUS_INVALID_ARGUMENT = 3,
  VALIGN_STATUS_INVALID_RANKING = 4,
  VALIGN_STATUS_INSUFFICIENT_DATA = 5,
  VALIGN_STATUS_IO = 6,
  VALIGN_STATUS_PARSE = 7,
  VALIGN_STATUS_INTERNAL = 8,
} ValignStatus;

/**
 * A loaded annotation panel.
 */
typedef struct ValignPanel ValignPanel;

/**
 * A loaded value taxonomy.
 */
typedef struct ValignTaxonomy ValignTaxonomy;

typedef struct ValignBootstrap {
  double mean;
  double ci_low;
  double ci_high;
  /**
   * Inputs that were NaN (undefined) and excluded from resamples.
   */
  size_t undefined;
} ValignBootstrap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *valign_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *valign_version(void);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void valign_string_free(char *s);

/**
 * F1 of the top-`k` sets of two rankings.
 *
 * # Safety
 * `a` and `b` must be valid C strings; `result` must be writable.
 */
enum ValignStatus valign_f1_at_k(const char *a, const char *b, size_t k, double *result);

/**
 * Jaccard index of the top-`k` sets of two rankings.
 *
 * # Safety
 * `a` and `b` must be valid C strings; `result` must be writable.
 */
enum ValignStatus valign_jaccard_at_k(const char *a, const char *b, size_t k, double *result);

/**
 * Normalized rank-biased overlap to depth `k` with persistence `p`.
 *
 * # Safety
 * `a` and `b` must be valid C strings; `result` must be writable.
 */
enum ValignStatus valign_rbo_at_k(const char *a, const char *b, size_t k, double p, double *result);

/**
 * Aggregates `n` voter rankings. `method` is `kemeny`, `majority` or
 * `borda`; `tie_policy` is NULL for the default or a policy name. The
 * consensus is written to `*ranking_out` and must be freed with
 * [`valign_string_free`].
 *
 * # Safety
 * `voters` must point to `n` valid C strings; `method` must be a valid C
 * string; `tie_policy` must be NULL or a valid C string; `ranking_out` must
 * be writable.
 */
enum ValignStatus valign_aggregate(const char *method,
                                   const char *const *voters,
                                   size_t n,
                                   size_t k,
                                   const char *tie_policy,
                                   char **ranking_out);

/**
 * Percentile bootstrap of the mean of `n` values. NaN marks an undefined
 * value, which is excluded from each resample.
 *
 * # Safety
 * `values` must point to `n` readable doubles; `result` must be writable.
 */
enum ValignStatus valign_bootstrap_mean(const double *values,
                                        size_t n,
                                        size_t replicates,
                                        double confidence,
                                        uint64_t seed,
                                        struct ValignBootstrap *result);

/**
 * The bundled ten-value taxonomy. Free with [`valign_taxonomy_free`].
 */
struct ValignTaxonomy *valign_taxonomy_bundled(void);

/**
 * Loads a TOML or JSON taxonomy file.
 *
 * # Safety
 * `path` must be a valid C string; `taxonomy_out` must be writable.
 */
enum ValignStatus valign_taxonomy_load(const char *path, struct ValignTaxonomy **taxonomy_out);

/**
 * Number of basic values, or 0 for NULL.
 *
 * # Safety
 * `taxonomy` must be NULL or a live handle.
 */
size_t valign_taxonomy_value_count(const struct ValignTaxonomy *taxonomy);

/**
 * # Safety
 * `taxonomy` must be NULL or a handle from this library, not yet freed.
 */
void valign_taxonomy_free(struct ValignTaxonomy *taxonomy);

/**
 * Loads a `.json` or `.csv` panel file.
 *
 * # Safety
 * `path` must be a valid C string; `panel_out` must be writable.
 */
enum ValignStatus valign_panel_load(const char *path, struct ValignPanel **panel_out);

/**
 * Parses a panel from its JSON record list.
 *
 * # Safety
 * `json` must be a valid C string; `panel_out` must be writable.
 */
enum ValignStatus valign_panel_from_json(const char *json, struct ValignPanel **panel_out);

/**
 * Checks every ranking in the panel against the taxonomy.
 *
 * # Safety
 * Both handles must be live.
 */
enum ValignStatus valign_panel_validate(const struct ValignPanel *panel,
                                        const struct ValignTaxonomy *taxonomy);

/**
 * Number of interviews, or 0 for NULL.
 *
 * # Safety
 * `panel` must be NULL or a live handle.
 */
size_t valign_panel_interview_count(const struct ValignPanel *panel);

/**
 * Krippendorff's alpha over the panel's expert columns. `distance` is
 * `jaccard`, `masi` or `nominal`.
 *
 * # Safety
 * `panel` must be a live handle; `distance` a valid C string; `result`
 * writable.
 */
enum ValignStatus valign_panel_expert_alpha(const struct ValignPanel *panel,
                                            const char *distance,
                                            size_t k,
                                            double *result);

/**
 * Number of model judges when `model` is true, expert judges otherwise.
 *
 * # Safety
 * `panel` must be NULL or a live handle.
 */
size_t valign_panel_judge_count(const struct ValignPanel *panel, bool model);

/**
 * # Safety
 * `panel` must be NULL or a handle from this library, not yet freed.
 */
void valign_panel_free(struct ValignPanel *panel);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VALIGN_H */
