#ifndef ALEXOT_H
#define ALEXOT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stddef.h>
#include <stdint.h>

// Result of an FFI call. The first four values match the exit codes of
// the `alexot` command line tool.
typedef enum AlexotStatus {
  ALEXOT_STATUS_OK = 0,
  // The computation ran but a check did not pass; the report is valid.
  ALEXOT_STATUS_VERIFICATION_FAILED = 1,
  ALEXOT_STATUS_INVALID_INPUT = 2,
  // The request exceeds what the implementation supports.
  ALEXOT_STATUS_UNSUPPORTED = 3,
  ALEXOT_STATUS_NULL_POINTER = 4,
  // A point was singular, tied or not differentiable where it had to be.
  ALEXOT_STATUS_NUMERICAL = 5,
  ALEXOT_STATUS_INTERNAL = 6,
} AlexotStatus;

// A validated transport instance.
typedef struct AlexotInstance AlexotInstance;

// An optimal plan with its centred dual potentials.
typedef struct AlexotSolution AlexotSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message describing the most recent failure on this thread, or null.
// The pointer stays valid until the next failing call on the same thread.
const char *alexot_last_error(void);

// Library version as a static NUL-terminated string.
const char *alexot_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` is null or was returned through a `char **` out parameter of this
// library and has not been freed.
void alexot_string_free(char *s);

// Parses and validates an instance from JSON.
//
// # Safety
// `json` is a NUL-terminated string; `out` is valid for writes.
enum AlexotStatus alexot_instance_from_json(const char *json, struct AlexotInstance **out);

// Serialises an instance back to JSON.
//
// # Safety
// `instance` is a live handle; `out` is valid for writes.
enum AlexotStatus alexot_instance_to_json(const struct AlexotInstance *instance, char **out);

// Number of source atoms, or 0 for a null handle.
//
// # Safety
// `instance` is null or a live handle.
size_t alexot_instance_source_len(const struct AlexotInstance *instance);

// Number of target atoms, or 0 for a null handle.
//
// # Safety
// `instance` is null or a live handle.
size_t alexot_instance_target_len(const struct AlexotInstance *instance);

// # Safety
// `instance` is null or a handle from this library not yet freed.
void alexot_instance_free(struct AlexotInstance *instance);

// Solves the discrete transport problem exactly.
//
// # Safety
// `instance` is a live handle; `out` is valid for writes.
enum AlexotStatus alexot_solve(const struct AlexotInstance *instance, struct AlexotSolution **out);

// Optimal total cost, or NaN for a null handle.
//
// # Safety
// `solution` is null or a live handle.
double alexot_solution_cost(const struct AlexotSolution *solution);

// Primal cost minus dual objective, or NaN for a null handle.
//
// # Safety
// `solution` is null or a live handle.
double alexot_solution_gap(const struct AlexotSolution *solution);

// Number of cells in the support of the plan, or 0 for a null handle.
//
// # Safety
// `solution` is null or a live handle.
size_t alexot_solution_support_len(const struct AlexotSolution *solution);

// Copies the support of the plan into three caller arrays of length `len`,
// which must equal [`alexot_solution_support_len`].
//
// # Safety
// `solution` is a live handle; each array is valid for `len` writes.
enum AlexotStatus alexot_solution_plan(const struct AlexotSolution *solution,
                                       size_t *sources,
                                       size_t *targets,
                                       double *masses,
                                       size_t len);

// Copies `φ` (length `n`, the source count) and `φᶜ` (length `m`, the
// target count) into caller arrays.
//
// # Safety
// `solution` is a live handle; `phi` is valid for `n` writes and `phi_c`
// for `m` writes.
enum AlexotStatus alexot_solution_potentials(const struct AlexotSolution *solution,
                                             double *phi,
                                             size_t n,
                                             double *phi_c,
                                             size_t m);

// The solution as `{"plan": [[i, j, mass], ...], "cost", "phi", "phi_c",
// "gap", "slackness_residual"}`.
//
// # Safety
// `solution` is a live handle; `out` is valid for writes.
enum AlexotStatus alexot_solution_to_json(const struct AlexotSolution *solution, char **out);

// # Safety
// `solution` is null or a handle from this library not yet freed.
void alexot_solution_free(struct AlexotSolution *solution);

// Geodesic distance between two points given by `dim` coordinates each
// (2 for the plane and cones in polar form, 3 for the sphere).
//
// # Safety
// `space_json` is a NUL-terminated string; `x` and `y` are valid for `dim`
// reads; `out` is valid for writes.
enum AlexotStatus alexot_distance(const char *space_json,
                                  const double *x,
                                  const double *y,
                                  size_t dim,
                                  double *out);

// Sampled triangle comparison of `space_json` against curvature `k`.
// Writes the JSON report and returns `Ok` or `VerificationFailed`.
//
// # Safety
// `space_json` is a NUL-terminated string; `report` is valid for writes.
enum AlexotStatus alexot_verify_curvature(const char *space_json,
                                          double k,
                                          size_t samples,
                                          uint64_t seed,
                                          double tol,
                                          char **report);

// Graph concentration and map formula check on the instance. Non-positive
// `fd_step` or `tol` select the defaults.
//
// # Safety
// `instance` is a live handle; `report` is valid for writes.
enum AlexotStatus alexot_verify_map(const struct AlexotInstance *instance,
                                    double fd_step,
                                    double tol,
                                    char **report);

// Compares optimal assignments across pivot rules and `trials` random
// cost perturbations of size at most `perturbation`.
//
// # Safety
// `instance` is a live handle; `report` is valid for writes.
enum AlexotStatus alexot_verify_uniqueness(const struct AlexotInstance *instance,
                                           double perturbation,
                                           size_t trials,
                                           uint64_t seed,
                                           char **report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALEXOT_H */
