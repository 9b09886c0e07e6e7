#ifndef MAXSTAB_H
#define MAXSTAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Status codes. `Ok` is zero; the rest mirror the core error kinds.
typedef enum MaxstabStatus {
  MAXSTAB_STATUS_OK = 0,
  MAXSTAB_STATUS_NULL_POINTER = 1,
  MAXSTAB_STATUS_INVALID_UTF8 = 2,
  MAXSTAB_STATUS_MALFORMED_JSON = 3,
  MAXSTAB_STATUS_MASS_SUM = 4,
  MAXSTAB_STATUS_NAN_VALUE = 5,
  MAXSTAB_STATUS_NEGATIVE_MASS = 6,
  MAXSTAB_STATUS_EMPTY_DISTRIBUTION = 7,
  MAXSTAB_STATUS_PROBABILITY_RANGE = 8,
  MAXSTAB_STATUS_INVALID_STEP = 9,
  MAXSTAB_STATUS_INVALID_KERNEL = 10,
  MAXSTAB_STATUS_INVALID_GRID = 11,
  MAXSTAB_STATUS_OFF_GRID = 12,
  MAXSTAB_STATUS_NOT_STRICTLY_INCREASING = 13,
  MAXSTAB_STATUS_INVALID_ARGUMENT = 14,
  MAXSTAB_STATUS_IO = 15,
  MAXSTAB_STATUS_PANIC = 99,
} MaxstabStatus;

// Opaque finite distribution.
typedef struct MaxstabDist MaxstabDist;

// Opaque risk measure built from a JSON measure description.
typedef struct MaxstabMeasure MaxstabMeasure;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. The pointer
// stays valid until the next failing call on the same thread.
const char *maxstab_last_error(void);

// Frees a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void maxstab_string_free(char *s);

// Builds a distribution from `n` support points and masses.
//
// # Safety
// `xs` and `ps` must point to `n` readable doubles; `out` must be writable.
enum MaxstabStatus maxstab_dist_new(const double *xs,
                                    const double *ps,
                                    size_t n,
                                    struct MaxstabDist **out);

// Parses a distribution from JSON text (`{"atoms": [...]}`).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum MaxstabStatus maxstab_dist_from_json(const char *json, struct MaxstabDist **out);

// Serializes a distribution to JSON. Free the result with
// [`maxstab_string_free`].
//
// # Safety
// `d` must be a live handle; `out` must be writable.
enum MaxstabStatus maxstab_dist_to_json(const struct MaxstabDist *d, char **out);

// Releases a distribution handle. Null is ignored.
//
// # Safety
// `d` must come from this library and not have been freed.
void maxstab_dist_free(struct MaxstabDist *d);

// Number of support points.
//
// # Safety
// `d` must be a live handle or null (which yields 0).
size_t maxstab_dist_len(const struct MaxstabDist *d);

// Copies support points and masses into caller buffers of length
// [`maxstab_dist_len`].
//
// # Safety
// `xs` and `ps` must each have room for `len` doubles.
enum MaxstabStatus maxstab_dist_atoms(const struct MaxstabDist *d,
                                      double *xs,
                                      double *ps,
                                      size_t len);

// `F(x)`.
//
// # Safety
// `d` must be a live handle; `out` must be writable.
enum MaxstabStatus maxstab_dist_cdf(const struct MaxstabDist *d, double x, double *out);

// Left quantile `inf{x : F(x) ≥ alpha}`, `alpha` in `(0, 1]`.
//
// # Safety
// `d` must be a live handle; `out` must be writable.
enum MaxstabStatus maxstab_dist_left_quantile(const struct MaxstabDist *d,
                                              double alpha,
                                              double *out);

// Right quantile `inf{x : F(x) > alpha}`, `alpha` in `[0, 1)`.
//
// # Safety
// `d` must be a live handle; `out` must be writable.
enum MaxstabStatus maxstab_dist_right_quantile(const struct MaxstabDist *d,
                                               double alpha,
                                               double *out);

// Least upper bound in the dominance order (pointwise min of CDFs).
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum MaxstabStatus maxstab_dist_join(const struct MaxstabDist *a,
                                     const struct MaxstabDist *b,
                                     struct MaxstabDist **out);

// Greatest lower bound (pointwise max of CDFs).
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum MaxstabStatus maxstab_dist_meet(const struct MaxstabDist *a,
                                     const struct MaxstabDist *b,
                                     struct MaxstabDist **out);

// Writes whether `a` is dominated by `b`.
//
// # Safety
// `a` and `b` must be live handles; `out` must be writable.
enum MaxstabStatus maxstab_dist_fsd_leq(const struct MaxstabDist *a,
                                        const struct MaxstabDist *b,
                                        bool *out);

// Builds a measure from its JSON description, e.g.
// `{"kind":"var","alpha":0.3}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum MaxstabStatus maxstab_measure_from_json(const char *json, struct MaxstabMeasure **out);

// Releases a measure handle. Null is ignored.
//
// # Safety
// `m` must come from this library and not have been freed.
void maxstab_measure_free(struct MaxstabMeasure *m);

// `ρ(F)`; `±inf` encode the infinite values.
//
// # Safety
// `m` and `d` must be live handles; `out` must be writable.
enum MaxstabStatus maxstab_measure_eval(const struct MaxstabMeasure *m,
                                        const struct MaxstabDist *d,
                                        double *out);

// Runs one axiom check (`"maxs"`, `"mins"`, `"nd"`, `"fsd"`, `"ls"`) with
// sampler defaults and the given seed and trial count. Writes the JSON
// report and whether it passed. A `tol` of zero or less selects the default.
//
// # Safety
// `m` must be a live handle, `axiom` a NUL-terminated string, and both
// out pointers writable.
enum MaxstabStatus maxstab_check_axiom(const struct MaxstabMeasure *m,
                                       const char *axiom,
                                       uint64_t seed,
                                       size_t trials,
                                       double tol,
                                       char **report_json,
                                       bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAXSTAB_H */
