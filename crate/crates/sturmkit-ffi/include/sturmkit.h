/* C interface of sturmkit: Sturm attractors of scalar 1-D parabolic equations. */

#ifndef STURMKIT_H
#define STURMKIT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirroring the CLI exit-code contract.
 */
typedef enum SturmStatus {
  SturmStatus_Ok = 0,
  SturmStatus_InvalidArgument = 1,
  SturmStatus_NonHyperbolic = 2,
  SturmStatus_Inconsistent = 3,
  SturmStatus_UnresolvedProbe = 4,
  SturmStatus_NumericalError = 5,
  SturmStatus_NullPointer = 6,
} SturmStatus;

/**
 * Opaque handle over the computed attractor: equilibria, Sturm data and the
 * connection graph.
 */
typedef struct SturmAttractor SturmAttractor;

/**
 * Opaque problem handle.
 */
typedef struct SturmProblem SturmProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent failure on this thread. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *sturm_last_error_message(void);

/**
 * Create a problem from a builtin family id ("chafee_infante",
 * "chafee_infante_semilinear", "odd_cubic") and a parameter map given as
 * parallel arrays.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `param_keys` and `param_values`
 * must point to `n_params` valid entries; `out` must be a valid pointer.
 */
enum SturmStatus sturm_problem_new(const char *family,
                                   const char *const *param_keys,
                                   const double *param_values,
                                   size_t n_params,
                                   struct SturmProblem **out);

/**
 * Create a problem from a TOML run-configuration document (the same format
 * the CLI consumes).
 *
 * # Safety
 * `toml_text` must be NUL-terminated; `out` must be valid.
 */
enum SturmStatus sturm_problem_from_config(const char *toml_text, struct SturmProblem **out);

/**
 * # Safety
 * `p` must come from a `sturm_problem_*` constructor (or be NULL).
 */
void sturm_problem_free(struct SturmProblem *p);

/**
 * Run the full combinatorial pipeline (scan, roots, invariants, graph) with
 * `n_init` initial shots (pass 0 for the default of 64).
 *
 * # Safety
 * `p` must be a valid problem handle; `out` must be valid.
 */
enum SturmStatus sturm_attractor_compute(const struct SturmProblem *p,
                                         size_t n_init,
                                         struct SturmAttractor **out);

/**
 * # Safety
 * `a` must come from `sturm_attractor_compute` (or be NULL).
 */
void sturm_attractor_free(struct SturmAttractor *a);

/**
 * Number of equilibria, or 0 for a NULL handle.
 *
 * # Safety
 * `a` must be a valid attractor handle or NULL.
 */
size_t sturm_attractor_count(const struct SturmAttractor *a);

/**
 * Boundary values u(0) (and u(pi) if `b` is non-NULL) in curve order.
 *
 * # Safety
 * Buffers must hold `len` doubles; `a` must be a valid handle.
 */
enum SturmStatus sturm_attractor_boundary_values(const struct SturmAttractor *a,
                                                 double *a_out,
                                                 double *b_out,
                                                 size_t len);

/**
 * Morse indices in curve order.
 *
 * # Safety
 * `out` must hold `len` u32; `a` must be a valid handle.
 */
enum SturmStatus sturm_attractor_morse(const struct SturmAttractor *a, uint32_t *out, size_t len);

/**
 * Fusco-Rocha permutation in one-line notation (1-based curve indices).
 *
 * # Safety
 * `out` must hold `len` u32; `a` must be a valid handle.
 */
enum SturmStatus sturm_attractor_sigma(const struct SturmAttractor *a, uint32_t *out, size_t len);

/**
 * Zero number z(e_j - e_k), 1-based; the diagonal returns -1 by the
 * convention for the identically zero function.
 *
 * # Safety
 * `a` must be a valid handle; `out` must be valid.
 */
enum SturmStatus sturm_attractor_zero_number(const struct SturmAttractor *a,
                                             size_t j,
                                             size_t k,
                                             int64_t *out);

/**
 * Number of heteroclinic connections (edges of the graph).
 *
 * # Safety
 * `a` must be a valid attractor handle or NULL.
 */
size_t sturm_attractor_edge_count(const struct SturmAttractor *a);

/**
 * All edges as parallel (source, target) arrays of 1-based indices.
 *
 * # Safety
 * Both buffers must hold `len` u32; `a` must be a valid handle.
 */
enum SturmStatus sturm_attractor_edges(const struct SturmAttractor *a,
                                       uint32_t *sources,
                                       uint32_t *targets,
                                       size_t len);

/**
 * 1 if a heteroclinic source -> target exists, 0 if not, -1 on NULL.
 *
 * # Safety
 * `a` must be a valid attractor handle or NULL.
 */
int32_t sturm_attractor_has_edge(const struct SturmAttractor *a, uint32_t source, uint32_t target);

/**
 * The Sturm data document as JSON; free with `sturm_string_free`.
 *
 * # Safety
 * `a` must be a valid handle; `out` must be valid.
 */
enum SturmStatus sturm_attractor_sturm_json(const struct SturmAttractor *a, char **out);

/**
 * The connection graph in DOT format; free with `sturm_string_free`.
 *
 * # Safety
 * `a` must be a valid handle; `out` must be valid.
 */
enum SturmStatus sturm_attractor_dot(const struct SturmAttractor *a, char **out);

/**
 * Free a string returned by this library.
 *
 * # Safety
 * `s` must have been returned by a `sturm_*` call (or be NULL), and must not
 * be used afterwards.
 */
void sturm_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STURMKIT_H */
