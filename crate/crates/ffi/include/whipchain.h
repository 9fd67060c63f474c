#ifndef WHIPCHAIN_H
#define WHIPCHAIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by every function.
 */
typedef enum WcStatus {
  WC_STATUS_OK = 0,
  WC_STATUS_NULL_POINTER = 1,
  WC_STATUS_INVALID_ARGUMENT = 2,
  WC_STATUS_LENGTH_MISMATCH = 3,
  WC_STATUS_SINGULAR_PIVOT = 4,
  WC_STATUS_DEGENERATE_PLANE = 5,
  WC_STATUS_NON_FINITE = 6,
  WC_STATUS_CFL_VIOLATION = 7,
  WC_STATUS_SIGN_CHECK = 8,
  WC_STATUS_PANIC = 9,
} WcStatus;

/**
 * Opaque chain state.
 */
typedef struct WcChain WcChain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Creates a chain of `n` links. `g` must be nonnegative.
 */
enum WcStatus wc_chain_new(size_t n,
                           const double *theta,
                           const double *omega,
                           double g,
                           struct WcChain **out);

/**
 * Releases a chain; null is ignored.
 */
void wc_chain_free(struct WcChain *chain);

/**
 * Number of links, or 0 for a null handle.
 */
size_t wc_chain_n(const struct WcChain *chain);

/**
 * Copies the current angles and rates.
 */
enum WcStatus wc_chain_state(const struct WcChain *chain,
                             double *theta_out,
                             double *omega_out,
                             size_t len);

enum WcStatus wc_chain_energy(const struct WcChain *chain, double *kinetic, double *potential);

enum WcStatus wc_chain_angular_momentum(const struct WcChain *chain, double *out);

/**
 * Joint positions and velocities as interleaved `(x, y)` pairs; each
 * buffer holds `2 (n + 1)` values.
 */
enum WcStatus wc_chain_reconstruct(const struct WcChain *chain,
                                   double *positions,
                                   double *velocities,
                                   size_t len);

/**
 * Tensions `λ_1..λ_n`; `pivots_out` may be null.
 */
enum WcStatus wc_chain_tension(const struct WcChain *chain,
                               double *lambda_out,
                               double *pivots_out,
                               size_t len);

/**
 * Angular accelerations `θ̈_1..θ̈_n`.
 */
enum WcStatus wc_chain_acceleration(const struct WcChain *chain, double *out, size_t len);

/**
 * Advances the chain in place by `steps` RK4 steps of size `dt`. On
 * failure the chain keeps its last finite state.
 */
enum WcStatus wc_chain_step_rk4(struct WcChain *chain, double dt, size_t steps);

/**
 * Inverse of the tension matrix, row-major `n × n`.
 */
enum WcStatus wc_chain_inverse(const struct WcChain *chain, double *out, size_t len);

/**
 * Curvature numerator and sectional curvature of the plane spanned by the
 * tangent vectors `eta`, `xi` (normal components, `len = n`).
 */
enum WcStatus wc_curvature(const struct WcChain *chain,
                           const double *eta,
                           const double *xi,
                           size_t len,
                           double *numerator,
                           double *curvature);

/**
 * Green function of `-∂² + κ²` on `m + 1 = len` nodes, row-major
 * `(m + 1) × (m + 1)` into `out`.
 */
enum WcStatus wc_green_table(const double *kappa, size_t len, double *out, size_t out_len);

/**
 * Continuum tension `σ` for the curve sampled at `len` nodes.
 */
enum WcStatus wc_sigma_solve(const double *theta,
                             const double *theta_t,
                             size_t len,
                             double g,
                             double *out);

/**
 * Riccati solution `f` on the `len` nodes of `kappa`, kinks given as
 * parallel arrays. Kink nodes hold `+inf`.
 */
enum WcStatus wc_riccati_solve(const double *kappa,
                               size_t len,
                               const double *kink_s,
                               const double *kink_alpha,
                               size_t kink_count,
                               double *f_out);

/**
 * Message for the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *wc_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wc_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WHIPCHAIN_H */
