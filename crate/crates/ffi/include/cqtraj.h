/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef CQTRAJ_H
#define CQTRAJ_H

#include <stddef.h>
#include <stdint.h>

typedef enum CqMask {
  CQ_MASK_DEFINED = 0,
  CQ_MASK_OVERDETERMINED = 1,
  CQ_MASK_UNREACHED = 2,
  CQ_MASK_NEAR_NODE = 3,
} CqMask;

typedef enum CqStatus {
  CQ_STATUS_OK = 0,
  CQ_STATUS_NULL_POINTER = 1,
  CQ_STATUS_INVALID_ARGUMENT = 2,
  CQ_STATUS_NODE_PROXIMITY = 3,
  CQ_STATUS_STATIONARY_POINT = 4,
  CQ_STATUS_DEGENERATE_POINT = 5,
  CQ_STATUS_STEP_FAILURE = 6,
  CQ_STATUS_HORIZON_EXCEEDED = 7,
  CQ_STATUS_UNSUPPORTED_STATE = 8,
  CQ_STATUS_MASK_VIOLATION = 9,
  CQ_STATUS_VERDICT = 10,
  CQ_STATUS_PARSE = 11,
  CQ_STATUS_VALIDATION = 12,
  CQ_STATUS_IO = 13,
  CQ_STATUS_OUT_OF_RANGE = 14,
  CQ_STATUS_PANIC = 15,
} CqStatus;

/**
 * Opaque stationary state.
 */
typedef struct CqState CqState;

/**
 * Opaque integrated trajectory.
 */
typedef struct CqTrajectory CqTrajectory;

typedef struct CqComplex {
  double re;
  double im;
} CqComplex;

/**
 * Integrator controls; fill with [`cq_integrator_defaults`] and adjust.
 */
typedef struct CqIntegrator {
  double rel_tol;
  double abs_tol;
  double max_step;
  double node_guard;
  uint64_t max_steps;
  double horizon_periods;
} CqIntegrator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into the library from the same thread.
 */
const char *cq_last_error_message(void);

/**
 * Parses a state string such as `ho:n=1` or `well:n=1,a=pi`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CqStatus cq_state_parse(const char *text, struct CqState **out);

/**
 * # Safety
 * `state` must come from [`cq_state_parse`] and not be used afterwards.
 */
void cq_state_free(struct CqState *state);

/**
 * Writes the canonical state string (with NUL) into `buf` when it fits and
 * returns the length needed including the NUL.
 *
 * # Safety
 * `buf` must hold `len` bytes or be null with `len == 0`.
 */
size_t cq_state_describe(const struct CqState *state, char *buf, size_t len);

/**
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_state_energy(const struct CqState *state, double *out);

/**
 * Ψ(x) and Ψ′(x).
 *
 * # Safety
 * Pointers must be valid; outputs writable.
 */
enum CqStatus cq_eval(const struct CqState *state,
                      struct CqComplex x,
                      struct CqComplex *psi,
                      struct CqComplex *dpsi);

/**
 * ẋ from the logarithmic derivative of Ψ.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_velocity(const struct CqState *state, struct CqComplex x, struct CqComplex *out);

/**
 * ẋ from the energy relation, independent of Ψ′.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_velocity_alt(const struct CqState *state,
                              struct CqComplex x,
                              struct CqComplex *out);

/**
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_complex_energy(const struct CqState *state,
                                struct CqComplex x,
                                struct CqComplex *out);

/**
 * `|A|`, constant along each path.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_path_constant(const struct CqState *state, struct CqComplex x, double *out);

/**
 * # Safety
 * `out` must be writable.
 */
enum CqStatus cq_integrator_defaults(struct CqIntegrator *out);

/**
 * Integrates `ẋ` from `x0` over `[t0, t1]`. `settings` may be null for
 * defaults.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_integrate_trajectory(const struct CqState *state,
                                      struct CqComplex x0,
                                      double t0,
                                      double t1,
                                      const struct CqIntegrator *settings,
                                      struct CqTrajectory **out);

/**
 * One closed loop through `x0`, or the horizon for open curves.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_integrate_loop(const struct CqState *state,
                                struct CqComplex x0,
                                const struct CqIntegrator *settings,
                                struct CqTrajectory **out);

/**
 * # Safety
 * `traj` must come from an integrate call and not be used afterwards.
 */
void cq_trajectory_free(struct CqTrajectory *traj);

/**
 * Number of samples, 0 for a null handle.
 *
 * # Safety
 * `traj` must be valid or null.
 */
size_t cq_trajectory_len(const struct CqTrajectory *traj);

/**
 * Sample `index`: time, position and velocity.
 *
 * # Safety
 * Pointers must be valid; outputs writable.
 */
enum CqStatus cq_trajectory_sample(const struct CqTrajectory *traj,
                                   size_t index,
                                   double *t,
                                   struct CqComplex *x,
                                   struct CqComplex *xdot);

/**
 * Path constant at the start and its largest relative drift.
 *
 * # Safety
 * Pointers must be valid; outputs writable.
 */
enum CqStatus cq_trajectory_path_constant(const struct CqTrajectory *traj,
                                          double *value,
                                          double *max_drift);

/**
 * Closed-form extended density and its mask.
 *
 * # Safety
 * Pointers must be valid; outputs writable.
 */
enum CqStatus cq_closed_form_rho(const struct CqState *state,
                                 struct CqComplex x,
                                 double *rho,
                                 enum CqMask *mask);

/**
 * Extended density by transport from the path's real-axis crossing.
 *
 * # Safety
 * Pointers must be valid; outputs writable; `settings` may be null.
 */
enum CqStatus cq_rho_at_point(const struct CqState *state,
                              struct CqComplex x,
                              const struct CqIntegrator *settings,
                              double *rho,
                              enum CqMask *mask);

/**
 * Unnormalized `|Ψ(x_r)|²`.
 *
 * # Safety
 * Pointers must be valid; `out` writable.
 */
enum CqStatus cq_born_direct(const struct CqState *state, double x_r, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* CQTRAJ_H */
