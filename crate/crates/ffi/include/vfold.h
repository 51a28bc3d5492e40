#ifndef VFOLD_H
#define VFOLD_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum VfStatus {
  VF_STATUS_OK = 0,
  VF_STATUS_NULL_POINTER = 1,
  VF_STATUS_INVALID_UTF8 = 2,
  VF_STATUS_INVALID_ARGUMENT = 3,
  VF_STATUS_NUMERICAL = 4,
  VF_STATUS_IO = 5,
  VF_STATUS_OUT_OF_RANGE = 6,
  VF_STATUS_PANIC = 7,
} VfStatus;

/**
 * An owned sample of `(x, y)` pairs.
 */
typedef struct VfDataset VfDataset;

/**
 * A finished benchmark table.
 */
typedef struct VfTable VfTable;

/**
 * Numbers of one table row. `v` is 0 and `c` is NaN when not applicable.
 */
typedef struct VfRow {
  size_t v;
  double c;
  double overpen;
  double c_or;
  double se_or;
  double c_path_or;
  double se_path_or;
  double c_prime_or;
  size_t n_reps;
  size_t drops;
} VfRow;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *vf_last_error(void);

/**
 * Library version as a static string.
 */
const char *vf_version(void);

/**
 * Runs `n_reps` replications of a built-in scenario. `threads == 0` uses
 * every core.
 *
 * # Safety
 * `scenario` and `selectors` must be NUL-terminated strings; `out` must be
 * writable.
 */
enum VfStatus vf_benchmark_run(const char *scenario,
                               const char *selectors,
                               size_t n_reps,
                               uint64_t seed,
                               size_t threads,
                               struct VfTable **out);

/**
 * Number of rows; 0 for a null handle.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
size_t vf_table_len(const struct VfTable *table);

/**
 * # Safety
 * `table` must be a live handle and `out` writable.
 */
enum VfStatus vf_table_row(const struct VfTable *table, size_t index, struct VfRow *out);

/**
 * Selector label of a row, owned by the table; null when out of range.
 *
 * # Safety
 * `table` must be null or a live handle.
 */
const char *vf_table_selector(const struct VfTable *table, size_t index);

/**
 * Serializes the table; release the string with [`vf_string_free`].
 *
 * # Safety
 * `table` must be a live handle and `out` writable.
 */
enum VfStatus vf_table_to_json(const struct VfTable *table, char **out);

/**
 * # Safety
 * `table` must be null or a handle from [`vf_benchmark_run`], freed once.
 */
void vf_table_free(struct VfTable *table);

/**
 * # Safety
 * `s` must be null or a string returned by this library, freed once.
 */
void vf_string_free(char *s);

/**
 * Copies `n` pairs; `x` must lie in `[0, 1)`.
 *
 * # Safety
 * `xs` and `ys` must point to `n` readable doubles; `out` must be writable.
 */
enum VfStatus vf_dataset_new(const double *xs, const double *ys, size_t n, struct VfDataset **out);

/**
 * # Safety
 * `data` must be null or a handle from [`vf_dataset_new`], freed once.
 */
void vf_dataset_free(struct VfDataset *data);

/**
 * Closed-form V-fold penalty of the regular histogram with `dims` cells.
 *
 * # Safety
 * `data` must be a live handle and `out` writable.
 */
enum VfStatus vf_pen_vf_closed(const struct VfDataset *data,
                               size_t dims,
                               size_t v,
                               double c,
                               double *out);

/**
 * `E[Z] E[Z^{-1} 1{Z>0}]` for `Z ~ Binomial(n, p)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum VfStatus vf_einvz(uint64_t n, double p, double *out);

/**
 * Bias of the V-fold penalty of a cell with `count` points.
 *
 * # Safety
 * `out` must be writable.
 */
enum VfStatus vf_delta_penv(uint64_t count, uint64_t v, double *out);

/**
 * Asymptotic excess-loss constant of V-fold cross-validation.
 *
 * # Safety
 * `out` must be writable.
 */
enum VfStatus vf_kappa_v(uint64_t v, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VFOLD_H */
