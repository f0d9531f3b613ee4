#ifndef FENCHEL_LAB_H
#define FENCHEL_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result codes. `Ok` is zero; everything else leaves a message behind.
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_ARGUMENT = 1,
  FL_STATUS_INVALID_UTF8 = 2,
  // Malformed JSON or a function description that does not validate.
  FL_STATUS_SCHEMA = 3,
  FL_STATUS_DIMENSION = 4,
  // Point outside the effective domain, or an empty domain.
  FL_STATUS_DOMAIN = 5,
  // Improper function or envelope.
  FL_STATUS_IMPROPER = 6,
  // The operation does not apply to this representation (for example a
  // grid function without a dual grid).
  FL_STATUS_UNSUPPORTED = 7,
  // Any other library error.
  FL_STATUS_LIBRARY = 8,
  // A usage problem reported by the command runner.
  FL_STATUS_USAGE = 9,
  // A Rust panic was caught at the boundary.
  FL_STATUS_INTERNAL = 10,
} FlStatus;

// Opaque function handle.
typedef struct FlFunction FlFunction;

// A uniform grid: `nodes[i]` points from `lower[i]` to `upper[i]` on each
// of `dim` axes.
typedef struct FlGridSpec {
  size_t dim;
  const double *lower;
  const double *upper;
  const size_t *nodes;
} FlGridSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. Valid until the
// next call into the library from the same thread.
const char *fl_last_error(void);

// Builds a function from a JSON description such as
// `{"kind":"polyhedral","pieces":[{"slope":[1],"intercept":0}]}`.
//
// # Safety
// `json` must be a nul-terminated string and `out` a valid pointer.
enum FlStatus fl_function_from_json(const char *json, struct FlFunction **out);

// Serializes a function in the form accepted by [`fl_function_from_json`].
//
// # Safety
// `f` must be a live handle; `out` receives a string to release with
// [`fl_string_free`].
enum FlStatus fl_function_to_json(const struct FlFunction *f, char **out);

// # Safety
// `f` must be null or a handle not yet freed.
void fl_function_free(struct FlFunction *f);

// # Safety
// `s` must be null or a string returned by this library.
void fl_string_free(char *s);

// Dimension of the function's argument, 0 for a null handle.
//
// # Safety
// `f` must be null or a live handle.
size_t fl_function_dim(const struct FlFunction *f);

// `f(x)`; writes `+inf` outside the domain.
//
// # Safety
// `x` must point to `len` doubles and `out` to one.
enum FlStatus fl_function_eval(const struct FlFunction *f,
                               const double *x,
                               size_t len,
                               double *out);

// Conjugate `f*`. Polyhedral and piecewise-min inputs give an exact
// polyhedral result and ignore `dual`; grid inputs need `dual`, the grid
// the conjugate is sampled on.
//
// # Safety
// `f` must be a live handle, `dual` null or a valid grid description,
// `out` a valid pointer.
enum FlStatus fl_function_conjugate(const struct FlFunction *f,
                                    const struct FlGridSpec *dual,
                                    struct FlFunction **out);

// Closed convex envelope `f**`, with the same grid rules as
// [`fl_function_conjugate`].
//
// # Safety
// As for [`fl_function_conjugate`].
enum FlStatus fl_function_envelope(const struct FlFunction *f,
                                   const struct FlGridSpec *dual,
                                   struct FlFunction **out);

// `f(x) − f**(x)`, the smallest `ε` for which the ε-subdifferential at
// `x` is nonempty. Polyhedral and piecewise-min functions only.
//
// # Safety
// `x` must point to `len` doubles and `out` to one.
enum FlStatus fl_eps_threshold(const struct FlFunction *f,
                               const double *x,
                               size_t len,
                               double *out);

// Support function of the ε-subdifferential at `x` in direction `u`:
// `+inf` when unbounded that way, `-inf` when the set is empty.
//
// # Safety
// `x` and `u` must point to `len` doubles and `out` to one.
enum FlStatus fl_eps_subdiff_support(const struct FlFunction *f,
                                     const double *x,
                                     size_t len,
                                     double epsilon,
                                     const double *u,
                                     double *out);

// Runs one of the command-line commands (`transform`, `subdiff`,
// `verify`, `witnesses`, `relax`) on an instance file or directory and
// returns the machine-format report and the exit code the binary would
// use. `Usage` means no report was produced (for example an empty
// directory).
//
// # Safety
// `command` and `path` must be nul-terminated strings; `report` and
// `exit_code` valid pointers. The report is released with
// [`fl_string_free`].
enum FlStatus fl_run(const char *command, const char *path, char **report, int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FENCHEL_LAB_H */
