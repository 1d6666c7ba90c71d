#ifndef MIXMORREY_H
#define MIXMORREY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a call across the C boundary.
 */
typedef enum {
  MM_STATUS_OK = 0,
  MM_STATUS_NULL_POINTER = 1,
  MM_STATUS_INVALID_ARGUMENT = 2,
  MM_STATUS_UNSUPPORTED = 3,
  MM_STATUS_GRID_MISMATCH = 4,
  MM_STATUS_NUMERICAL = 5,
  MM_STATUS_CONFIG = 6,
  MM_STATUS_IO = 7,
  MM_STATUS_SERIALIZATION = 8,
  MM_STATUS_BUFFER_TOO_SMALL = 9,
  MM_STATUS_PANIC = 10,
} MmStatus;

/**
 * Opaque function sampled on a grid.
 */
typedef struct MmFunction MmFunction;

/**
 * Opaque uniform grid on `[-half_width, half_width]^dim`.
 */
typedef struct MmGrid MmGrid;

/**
 * Logarithmic radial grid: `points_per_octave` nodes per octave over `[2^j_min, 2^j_max]`.
 */
typedef struct {
  int32_t j_min;
  int32_t j_max;
  uint32_t points_per_octave;
} MmRadialGrid;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *mm_version(void);

/**
 * Message of the most recent failure on this thread, or NULL. The pointer
 * stays valid until the next failing call or [`mm_clear_last_error`].
 */
const char *mm_last_error(void);

/**
 * Length in bytes of the last error message, excluding the terminator.
 */
size_t mm_last_error_length(void);

void mm_clear_last_error(void);

/**
 * Creates a grid with `points` nodes per axis (odd, at least 17).
 *
 * # Safety
 * `out` must be NULL or point to writable storage for one pointer.
 */
MmStatus mm_grid_new(size_t dim, double half_width, size_t points, MmGrid **out);

/**
 * # Safety
 * `grid` must be NULL or a handle from [`mm_grid_new`] that was not freed yet.
 */
void mm_grid_free(MmGrid *grid);

/**
 * Total number of nodes, or 0 for NULL.
 *
 * # Safety
 * `grid` must be NULL or a live grid handle.
 */
size_t mm_grid_len(const MmGrid *grid);

/**
 * Wraps `len` node values, first axis varying fastest.
 *
 * # Safety
 * `grid` must be a live grid handle, `values` must hold `len` doubles and
 * `out` must be writable.
 */
MmStatus mm_function_from_values(const MmGrid *grid,
                                 const double *values,
                                 size_t len,
                                 MmFunction **out);

/**
 * Samples an analytic function described in JSON, for example
 * `{"kind": "cube_indicator", "center": [0.0], "half_side": 1.0}`.
 *
 * # Safety
 * `grid` must be a live grid handle, `spec_json` a NUL-terminated string and
 * `out` writable.
 */
MmStatus mm_function_from_spec_json(const MmGrid *grid, const char *spec_json, MmFunction **out);

/**
 * # Safety
 * `f` must be NULL or a function handle that was not freed yet.
 */
void mm_function_free(MmFunction *f);

/**
 * Number of node values, or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live function handle.
 */
size_t mm_function_len(const MmFunction *f);

/**
 * Copies the node values into `buf`, which must hold at least
 * [`mm_function_len`] doubles.
 *
 * # Safety
 * `f` must be a live function handle and `buf` writable for `cap` doubles.
 */
MmStatus mm_function_copy_values(const MmFunction *f, double *buf, size_t cap);

/**
 * Mixed Lebesgue norm with one exponent per axis (`inf` allowed).
 *
 * # Safety
 * `f` must be a live function handle, `p` must hold `p_len` doubles and
 * `out` must be writable.
 */
MmStatus mm_mixed_norm(const MmFunction *f, const double *p, size_t p_len, double *out);

/**
 * Local Morrey norm with index `lambda`, evaluated on the given radial grid.
 *
 * # Safety
 * As for [`mm_mixed_norm`].
 */
MmStatus mm_lm_lambda_norm(const MmFunction *f,
                           const double *p,
                           size_t p_len,
                           double theta,
                           double lambda,
                           MmRadialGrid rgrid,
                           double *out);

/**
 * Centered Hardy–Littlewood maximal function over cubes, as a new handle.
 *
 * # Safety
 * `f` must be a live function handle and `out` writable.
 */
MmStatus mm_hl_maximal(const MmFunction *f, MmFunction **out);

/**
 * Certifies one registered inequality over the standard corpus and returns
 * the full report as JSON. `params_json` may be NULL for defaults; with
 * `resolutions_len == 0` the default resolutions for `dim` are used. The
 * returned string is released with [`mm_string_free`].
 *
 * # Safety
 * `name` must be a NUL-terminated string, `params_json` NULL or one,
 * `resolutions` must hold `resolutions_len` values and `out_json` writable.
 */
MmStatus mm_certify_json(const char *name,
                         size_t dim,
                         const char *params_json,
                         const size_t *resolutions,
                         size_t resolutions_len,
                         char **out_json);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string from [`mm_certify_json`] that was not freed yet.
 */
void mm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MIXMORREY_H */
