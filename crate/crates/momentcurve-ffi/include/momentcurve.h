#ifndef MOMENTCURVE_H
#define MOMENTCURVE_H

/* Generated by cbindgen from momentcurve-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Success.
#define MC_OK 0

// A required pointer argument was null.
#define MC_ERR_NULL 1

// The input could not be parsed or fails a precondition.
#define MC_ERR_INVALID 2

// The numeric extraction path missed its tolerance.
#define MC_ERR_NUMERIC 3

// A string argument was not valid UTF-8.
#define MC_ERR_UTF8 4

// The library panicked; the handle is still valid, the result is not.
#define MC_ERR_PANIC 5

// An immutable parsed moment table of total degree 2k.
typedef struct McMoments McMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Last error message recorded on the calling thread, empty when the last
// call succeeded. The pointer stays valid until the next failing call on
// the same thread; do not free it.
const char *mc_last_error(void);

// Parses moment JSON `{"k": k, "moments": [{"i", "j", "v"}]}` into a
// handle. Returns null on error; the reason is in `mc_last_error`.
//
// # Safety
// `json` must be null or a valid NUL-terminated C string.
struct McMoments *mc_moments_parse(const char *json);

// Releases a handle returned by `mc_moments_parse`. Null is a no-op.
//
// # Safety
// `handle` must be null or a pointer obtained from `mc_moments_parse`
// that has not been freed yet.
void mc_moments_free(struct McMoments *handle);

// Releases a string returned through an `out_json` parameter. Null is a
// no-op.
//
// # Safety
// `s` must be null or a string pointer this library returned that has not
// been freed yet.
void mc_string_free(char *s);

// Decides existence for the family a y + x^2 + y^2 = 0 with the rational
// circle parameter `a` given as `num/den`. On success writes the report
// JSON to `*out_json`.
//
// # Safety
// `handle` must be a live handle from `mc_moments_parse`, `a` a valid
// NUL-terminated C string, and `out_json` a valid destination pointer.
int32_t mc_solve_circular(const struct McMoments *handle, const char *a, char **out_json);

// Decides existence for the family x = y^2. On success writes the report
// JSON to `*out_json`.
//
// # Safety
// `handle` must be a live handle from `mc_moments_parse` and `out_json` a
// valid destination pointer.
int32_t mc_solve_parabolic(const struct McMoments *handle, char **out_json);

// Detects the cubic column relation, reduces it to canonical form, and
// writes the classification JSON to `*out_json`.
//
// # Safety
// `handle` must be a live handle from `mc_moments_parse` and `out_json` a
// valid destination pointer.
int32_t mc_classify(const struct McMoments *handle, char **out_json);

// Size (k+1)(k+2)/2 of the moment matrix behind the handle, or 0 for a
// null handle.
//
// # Safety
// `handle` must be null or a live handle from `mc_moments_parse`.
size_t mc_matrix_size(const struct McMoments *handle);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MOMENTCURVE_H */
