#ifndef IDS_BANDIT_H
#define IDS_BANDIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum IdsStatus {
  IDS_STATUS_OK = 0,
  IDS_STATUS_INVALID_PARAMETER = 1,
  IDS_STATUS_ZERO_LIKELIHOOD = 2,
  IDS_STATUS_ITERATION_LIMIT = 3,
  IDS_STATUS_DEGENERATE_THETA = 4,
  IDS_STATUS_DEGENERATE_RATIO = 5,
  IDS_STATUS_NO_BOUNDARY = 6,
  IDS_STATUS_MULTIPLE_BOUNDARIES = 7,
  IDS_STATUS_NULL_POINTER = 8,
  IDS_STATUS_BUFFER_TOO_SMALL = 9,
  IDS_STATUS_PANIC = 10,
  IDS_STATUS_OTHER = 11,
} IdsStatus;

/**
 * Which per-node column [`ids_solution_copy`] reads.
 */
typedef enum IdsColumn {
  IDS_COLUMN_BETA = 0,
  IDS_COLUMN_VALUE = 1,
  IDS_COLUMN_REGRET = 2,
  /**
   * Probability of playing +1.
   */
  IDS_COLUMN_POLICY_Q = 3,
} IdsColumn;

/**
 * Opaque handle to a value function, its regret and its policy on a grid.
 */
typedef struct IdsSolution IdsSolution;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t ids_last_error_message(char *buf, size_t len);

/**
 * Win probability of action `a` in state `s` (both -1 or +1).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IdsStatus ids_win_prob(double theta_minus, double theta_plus, int8_t s, int8_t a, double *out);

/**
 * Expected immediate reward of action `a` at belief `beta`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IdsStatus ids_expected_reward(double theta_minus,
                                   double theta_plus,
                                   double beta,
                                   int8_t a,
                                   double *out);

/**
 * Posterior belief after playing `a` and observing `y` (0 = loss, 1 = win).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IdsStatus ids_belief_update(double theta_minus,
                                 double theta_plus,
                                 double beta,
                                 int8_t a,
                                 uint8_t y,
                                 double *out);

/**
 * Entropy of the belief in nats.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IdsStatus ids_entropy(double beta, double *out);

/**
 * Mutual information between the state and the outcome of action `a`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IdsStatus ids_mutual_information(double theta_minus,
                                      double theta_plus,
                                      double beta,
                                      int8_t a,
                                      double *out);

/**
 * Probability that IDS(alpha) plays +1 at `beta`.
 *
 * # Safety
 * `out_q` must be valid for writes.
 */
enum IdsStatus ids_action_probability(double theta_minus,
                                      double theta_plus,
                                      double beta,
                                      double alpha,
                                      double gamma,
                                      double *out_q);

/**
 * Exponents `zeta_plus < 0 < 1 < zeta_minus` of the symmetric solution.
 *
 * # Safety
 * Both out-pointers must be valid for writes.
 */
enum IdsStatus ids_zeta(double theta, double gamma, double *out_plus, double *out_minus);

/**
 * Closed-form optimal value of the symmetric bandit.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IdsStatus ids_symmetric_value(double theta, double gamma, double beta, double *out);

/**
 * Closed-form decision boundary when arm -1 is a fair coin.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum IdsStatus ids_fair_coin_boundary(double theta_plus, double gamma, double *out);

/**
 * Optimal solution by value iteration. `tol <= 0` selects the default
 * tolerance `1e-9 / (1 - gamma)`.
 *
 * # Safety
 * `out` must be valid for writes; the handle must be freed with
 * [`ids_solution_free`].
 */
enum IdsStatus ids_solve_optimal(double theta_minus,
                                 double theta_plus,
                                 double gamma,
                                 size_t grid_points,
                                 double tol,
                                 struct IdsSolution **out);

/**
 * Value of the IDS(alpha) policy by policy evaluation.
 *
 * # Safety
 * As [`ids_solve_optimal`].
 */
enum IdsStatus ids_evaluate_ids(double theta_minus,
                                double theta_plus,
                                double gamma,
                                double alpha,
                                size_t grid_points,
                                double tol,
                                struct IdsSolution **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `sol` must be null or a handle not yet freed.
 */
void ids_solution_free(struct IdsSolution *sol);

/**
 * Number of grid nodes, or 0 for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
size_t ids_solution_len(const struct IdsSolution *sol);

/**
 * Sweeps performed by the solver, or 0 for a null handle.
 *
 * # Safety
 * `sol` must be null or a live handle.
 */
size_t ids_solution_iterations(const struct IdsSolution *sol);

/**
 * Copies one per-node column into `buf`, which must hold at least
 * [`ids_solution_len`] values.
 *
 * # Safety
 * `sol` must be a live handle and `buf` valid for `len` writes.
 */
enum IdsStatus ids_solution_copy(const struct IdsSolution *sol,
                                 enum IdsColumn column,
                                 double *buf,
                                 size_t len);

/**
 * Interpolated value at `beta`.
 *
 * # Safety
 * `sol` must be a live handle and `out` valid for writes.
 */
enum IdsStatus ids_solution_value_at(const struct IdsSolution *sol, double beta, double *out);

/**
 * Interpolated regret at `beta`.
 *
 * # Safety
 * `sol` must be a live handle and `out` valid for writes.
 */
enum IdsStatus ids_solution_regret_at(const struct IdsSolution *sol, double beta, double *out);

/**
 * Belief at which the policy's preferred action switches.
 *
 * # Safety
 * `sol` must be a live handle and `out` valid for writes.
 */
enum IdsStatus ids_solution_boundary(const struct IdsSolution *sol, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IDS_BANDIT_H */
