//! C ABI over `ids-bandit`.
//!
//! Every fallible function returns an [`IdsStatus`] and writes results through
//! out-pointers. Solved problems are returned as opaque [`IdsSolution`]
//! handles that must be released with [`ids_solution_free`]. After a
//! non-`Ok` status, [`ids_last_error_message`] describes the failure of the
//! calling thread's last call.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use ids_bandit::analytic::{zeta_exponents, FairCoinSolution, SymmetricSolution};
use ids_bandit::ids::{ids_action_dist, ids_policy_on_grid, IdsConfig};
use ids_bandit::solver::{regret_curve, BellmanOperator, SolverOptions};
use ids_bandit::{
    ActionDistribution, BanditSpec, Belief, BeliefGrid, DiscountedProblem, Error, Observation, PolicyTable, Sign,
    ValueFunction,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdsStatus {
    Ok = 0,
    InvalidParameter = 1,
    ZeroLikelihood = 2,
    IterationLimit = 3,
    DegenerateTheta = 4,
    DegenerateRatio = 5,
    NoBoundary = 6,
    MultipleBoundaries = 7,
    NullPointer = 8,
    BufferTooSmall = 9,
    Panic = 10,
    Other = 11,
}

impl From<&Error> for IdsStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter { .. } | Error::GridMismatch { .. } | Error::InsufficientSamples { .. } => {
                IdsStatus::InvalidParameter
            }
            Error::ZeroLikelihood { .. } => IdsStatus::ZeroLikelihood,
            Error::IterationLimit { .. } => IdsStatus::IterationLimit,
            Error::DegenerateTheta(_) => IdsStatus::DegenerateTheta,
            Error::DegenerateRatio { .. } => IdsStatus::DegenerateRatio,
            Error::NoBoundary => IdsStatus::NoBoundary,
            Error::MultipleBoundaries { .. } => IdsStatus::MultipleBoundaries,
            _ => IdsStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(IdsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(IdsStatus::from(&e), e.to_string())
    }
}

fn null() -> Failure {
    Failure(IdsStatus::NullPointer, "null pointer argument".into())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> IdsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            IdsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            IdsStatus::Panic
        }
    }
}

fn write<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

fn sign(v: i8) -> Result<Sign, Failure> {
    Sign::from_i8(v).ok_or_else(|| Failure(IdsStatus::InvalidParameter, format!("action/state must be -1 or +1, got {v}")))
}

fn observation(y: u8) -> Result<Observation, Failure> {
    match y {
        0 => Ok(Observation::Loss),
        1 => Ok(Observation::Win),
        _ => Err(Failure(IdsStatus::InvalidParameter, format!("observation must be 0 or 1, got {y}"))),
    }
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ids_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Win probability of action `a` in state `s` (both -1 or +1).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_win_prob(theta_minus: f64, theta_plus: f64, s: i8, a: i8, out: *mut f64) -> IdsStatus {
    guard(|| {
        let spec = BanditSpec::new(theta_minus, theta_plus)?;
        write(out, spec.win_prob(sign(s)?, sign(a)?))
    })
}

/// Expected immediate reward of action `a` at belief `beta`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_expected_reward(
    theta_minus: f64,
    theta_plus: f64,
    beta: f64,
    a: i8,
    out: *mut f64,
) -> IdsStatus {
    guard(|| {
        let spec = BanditSpec::new(theta_minus, theta_plus)?;
        write(out, spec.expected_reward(Belief::new(beta)?, sign(a)?))
    })
}

/// Posterior belief after playing `a` and observing `y` (0 = loss, 1 = win).
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_belief_update(
    theta_minus: f64,
    theta_plus: f64,
    beta: f64,
    a: i8,
    y: u8,
    out: *mut f64,
) -> IdsStatus {
    guard(|| {
        let spec = BanditSpec::new(theta_minus, theta_plus)?;
        let post = spec.belief_update(Belief::new(beta)?, sign(a)?, observation(y)?)?;
        write(out, post.beta())
    })
}

/// Entropy of the belief in nats.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_entropy(beta: f64, out: *mut f64) -> IdsStatus {
    guard(|| write(out, Belief::new(beta)?.entropy()))
}

/// Mutual information between the state and the outcome of action `a`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_mutual_information(
    theta_minus: f64,
    theta_plus: f64,
    beta: f64,
    a: i8,
    out: *mut f64,
) -> IdsStatus {
    guard(|| {
        let spec = BanditSpec::new(theta_minus, theta_plus)?;
        write(out, spec.mutual_information(Belief::new(beta)?, sign(a)?))
    })
}

/// Probability that IDS(alpha) plays +1 at `beta`.
///
/// # Safety
/// `out_q` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_action_probability(
    theta_minus: f64,
    theta_plus: f64,
    beta: f64,
    alpha: f64,
    gamma: f64,
    out_q: *mut f64,
) -> IdsStatus {
    guard(|| {
        let spec = BanditSpec::new(theta_minus, theta_plus)?;
        let config = IdsConfig::new(alpha, gamma)?;
        write(out_q, ids_action_dist(&spec, Belief::new(beta)?, &config).q_star.q())
    })
}

/// Exponents `zeta_plus < 0 < 1 < zeta_minus` of the symmetric solution.
///
/// # Safety
/// Both out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_zeta(theta: f64, gamma: f64, out_plus: *mut f64, out_minus: *mut f64) -> IdsStatus {
    guard(|| {
        if out_plus.is_null() || out_minus.is_null() {
            return Err(null());
        }
        let z = zeta_exponents(theta, gamma)?;
        write(out_plus, z.zeta_plus)?;
        write(out_minus, z.zeta_minus)
    })
}

/// Closed-form optimal value of the symmetric bandit.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_symmetric_value(theta: f64, gamma: f64, beta: f64, out: *mut f64) -> IdsStatus {
    guard(|| {
        Belief::new(beta)?;
        write(out, SymmetricSolution::new(theta, gamma)?.value(beta))
    })
}

/// Closed-form decision boundary when arm -1 is a fair coin.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_fair_coin_boundary(theta_plus: f64, gamma: f64, out: *mut f64) -> IdsStatus {
    guard(|| write(out, FairCoinSolution::new(theta_plus, gamma)?.beta_c))
}

/// Opaque handle to a value function, its regret and its policy on a grid.
pub struct IdsSolution {
    value: ValueFunction,
    regret: ValueFunction,
    policy: PolicyTable,
    iterations: usize,
}

fn options(prob: &DiscountedProblem, tol: f64) -> Result<SolverOptions, Failure> {
    Ok(if tol > 0.0 {
        SolverOptions::new(tol, prob.gamma)?
    } else {
        SolverOptions::for_problem(prob)
    })
}

fn solve_into(
    out: *mut *mut IdsSolution,
    f: impl FnOnce() -> Result<IdsSolution, Failure>,
) -> IdsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let sol = f()?;
        write(out, Box::into_raw(Box::new(sol)))
    })
}

/// Optimal solution by value iteration. `tol <= 0` selects the default
/// tolerance `1e-9 / (1 - gamma)`.
///
/// # Safety
/// `out` must be valid for writes; the handle must be freed with
/// [`ids_solution_free`].
#[no_mangle]
pub unsafe extern "C" fn ids_solve_optimal(
    theta_minus: f64,
    theta_plus: f64,
    gamma: f64,
    grid_points: usize,
    tol: f64,
    out: *mut *mut IdsSolution,
) -> IdsStatus {
    solve_into(out, || {
        let prob = DiscountedProblem::new(BanditSpec::new(theta_minus, theta_plus)?, gamma)?;
        let grid = BeliefGrid::new(grid_points)?;
        let op = BellmanOperator::new(prob, &grid);
        let solve = op.value_iteration(options(&prob, tol)?)?;
        Ok(IdsSolution {
            regret: regret_curve(&prob, &solve.value),
            policy: op.greedy_policy(solve.value.values()),
            value: solve.value,
            iterations: solve.iterations,
        })
    })
}

/// Value of the IDS(alpha) policy by policy evaluation.
///
/// # Safety
/// As [`ids_solve_optimal`].
#[no_mangle]
pub unsafe extern "C" fn ids_evaluate_ids(
    theta_minus: f64,
    theta_plus: f64,
    gamma: f64,
    alpha: f64,
    grid_points: usize,
    tol: f64,
    out: *mut *mut IdsSolution,
) -> IdsStatus {
    solve_into(out, || {
        let prob = DiscountedProblem::new(BanditSpec::new(theta_minus, theta_plus)?, gamma)?;
        let grid = BeliefGrid::new(grid_points)?;
        let policy = ids_policy_on_grid(&prob, &grid, &IdsConfig::new(alpha, gamma)?);
        let solve = BellmanOperator::new(prob, &grid).policy_evaluation(&policy, options(&prob, tol)?)?;
        Ok(IdsSolution {
            regret: regret_curve(&prob, &solve.value),
            policy,
            value: solve.value,
            iterations: solve.iterations,
        })
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `sol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ids_solution_free(sol: *mut IdsSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

unsafe fn handle<'a>(sol: *const IdsSolution) -> Result<&'a IdsSolution, Failure> {
    sol.as_ref().ok_or_else(null)
}

/// Number of grid nodes, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ids_solution_len(sol: *const IdsSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.value.grid().len())
}

/// Sweeps performed by the solver, or 0 for a null handle.
///
/// # Safety
/// `sol` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ids_solution_iterations(sol: *const IdsSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.iterations)
}

/// Which per-node column [`ids_solution_copy`] reads.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdsColumn {
    Beta = 0,
    Value = 1,
    Regret = 2,
    /// Probability of playing +1.
    PolicyQ = 3,
}

/// Copies one per-node column into `buf`, which must hold at least
/// [`ids_solution_len`] values.
///
/// # Safety
/// `sol` must be a live handle and `buf` valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn ids_solution_copy(
    sol: *const IdsSolution,
    column: IdsColumn,
    buf: *mut f64,
    len: usize,
) -> IdsStatus {
    guard(|| {
        let s = handle(sol)?;
        if buf.is_null() {
            return Err(null());
        }
        let n = s.value.grid().len();
        if len < n {
            return Err(Failure(IdsStatus::BufferTooSmall, format!("buffer holds {len} values, need {n}")));
        }
        let dst = std::slice::from_raw_parts_mut(buf, n);
        match column {
            IdsColumn::Beta => dst.copy_from_slice(s.value.grid().nodes()),
            IdsColumn::Value => dst.copy_from_slice(s.value.values()),
            IdsColumn::Regret => dst.copy_from_slice(s.regret.values()),
            IdsColumn::PolicyQ => {
                for (d, p) in dst.iter_mut().zip(s.policy.dists()) {
                    *d = ActionDistribution::q(*p);
                }
            }
        }
        Ok(())
    })
}

/// Interpolated value at `beta`.
///
/// # Safety
/// `sol` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_solution_value_at(sol: *const IdsSolution, beta: f64, out: *mut f64) -> IdsStatus {
    guard(|| {
        let s = handle(sol)?;
        Belief::new(beta)?;
        write(out, s.value.at(beta))
    })
}

/// Interpolated regret at `beta`.
///
/// # Safety
/// `sol` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_solution_regret_at(sol: *const IdsSolution, beta: f64, out: *mut f64) -> IdsStatus {
    guard(|| {
        let s = handle(sol)?;
        Belief::new(beta)?;
        write(out, s.regret.at(beta))
    })
}

/// Belief at which the policy's preferred action switches.
///
/// # Safety
/// `sol` must be a live handle and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ids_solution_boundary(sol: *const IdsSolution, out: *mut f64) -> IdsStatus {
    guard(|| {
        let s = handle(sol)?;
        write(out, s.policy.decision_boundary()?)
    })
}
