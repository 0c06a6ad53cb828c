//! Discounted dynamic programming on the belief grid.
//!
//! Every grid node has, per action, two successor beliefs (one per
//! observation). Successors fall between nodes and are read by linear
//! interpolation, so the backup is a convex combination of node values and
//! stays a `gamma`-contraction in the max-norm.

use serde::{Deserialize, Serialize};

use crate::error::{check_discount, Error, Result};
use crate::grid::{sup_distance, BeliefGrid, PolicyTable, ValueFunction};
use crate::model::{Action, ActionDistribution, BanditSpec, Belief, Observation, Sign};

/// Relative width under which two action values count as tied.
const TIE_EPS: f64 = 1e-12;

/// A bandit together with its discount factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountedProblem {
    pub spec: BanditSpec,
    pub gamma: f64,
}

impl DiscountedProblem {
    pub fn new(spec: BanditSpec, gamma: f64) -> Result<Self> {
        check_discount(gamma)?;
        Ok(Self { spec, gamma })
    }

    pub fn horizon(&self) -> f64 {
        1.0 / (1.0 - self.gamma)
    }

    /// Stopping threshold on the sup-norm step, scaled with the value magnitude.
    pub fn default_tol(&self) -> f64 {
        1e-9 * self.horizon()
    }

    /// Value of an agent who knows the hidden state.
    pub fn mdp_value(&self, b: Belief) -> f64 {
        Sign::BOTH
            .iter()
            .map(|&s| b.prob(s) * self.spec.best_reward(s))
            .sum::<f64>()
            * self.horizon()
    }

    pub fn mdp_value_function(&self, grid: &BeliefGrid) -> ValueFunction {
        ValueFunction::from_fn(grid.clone(), |beta| self.mdp_value(Belief::clamped(beta)))
    }
}

/// Stopping rule for the fixed-point iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_sweeps: usize,
}

impl SolverOptions {
    pub fn new(tol: f64, gamma: f64) -> Result<Self> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tol",
                value: tol,
                reason: "tolerance must be positive",
            });
        }
        check_discount(gamma)?;
        let sweeps = 10.0 * (1.0 / tol).ln().max(1.0) / (1.0 - gamma);
        Ok(Self {
            tol,
            max_sweeps: (sweeps.ceil() as usize).max(100),
        })
    }

    pub fn for_problem(prob: &DiscountedProblem) -> Self {
        Self::new(prob.default_tol(), prob.gamma).expect("default tolerance is valid")
    }

    pub fn with_max_sweeps(mut self, max_sweeps: usize) -> Self {
        self.max_sweeps = max_sweeps;
        self
    }
}

/// Result of a fixed-point iteration.
#[derive(Debug, Clone)]
pub struct Solve {
    pub value: ValueFunction,
    pub iterations: usize,
    /// Sup-norm step `||V_{k+1} - V_k||` of every sweep.
    pub residuals: Vec<f64>,
}

impl Solve {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }

    /// Guaranteed distance to the true fixed point.
    pub fn error_bound(&self, gamma: f64) -> f64 {
        self.residual() * gamma / (1.0 - gamma)
    }
}

#[derive(Debug, Clone, Copy)]
struct Branch {
    prob: f64,
    lo: usize,
    w: f64,
}

impl Branch {
    #[inline]
    fn read(&self, v: &[f64]) -> f64 {
        self.prob * ((1.0 - self.w) * v[self.lo] + self.w * v[self.lo + 1])
    }
}

/// Precomputed rewards, observation probabilities and interpolation
/// stencils of every (node, action) pair.
#[derive(Debug, Clone)]
pub struct BellmanOperator {
    problem: DiscountedProblem,
    grid: BeliefGrid,
    reward: [Vec<f64>; 2],
    branches: [Vec<[Branch; 2]>; 2],
}

impl BellmanOperator {
    pub fn new(problem: DiscountedProblem, grid: &BeliefGrid) -> Self {
        let spec = problem.spec;
        let per_action = |a: Action| {
            let mut reward = Vec::with_capacity(grid.len());
            let mut branches = Vec::with_capacity(grid.len());
            for &beta in grid.nodes() {
                let b = Belief::clamped(beta);
                reward.push(spec.expected_reward(b, a));
                let branch = |y: Observation| {
                    let prob = spec.obs_prob(b, a, y);
                    match spec.belief_update(b, a, y) {
                        Ok(post) if prob > 0.0 => {
                            let (lo, w) = grid.locate(post.beta());
                            Branch { prob, lo, w }
                        }
                        _ => Branch {
                            prob: 0.0,
                            lo: 0,
                            w: 0.0,
                        },
                    }
                };
                branches.push([branch(Observation::Loss), branch(Observation::Win)]);
            }
            (reward, branches)
        };
        let (r_minus, b_minus) = per_action(Action::Minus);
        let (r_plus, b_plus) = per_action(Action::Plus);
        Self {
            problem,
            grid: grid.clone(),
            reward: [r_minus, r_plus],
            branches: [b_minus, b_plus],
        }
    }

    pub fn problem(&self) -> &DiscountedProblem {
        &self.problem
    }

    pub fn grid(&self) -> &BeliefGrid {
        &self.grid
    }

    /// `sum_y p_b(y | a) v(beta'_{ay})` at node `i`.
    #[inline]
    pub fn continuation(&self, a: Action, i: usize, v: &[f64]) -> f64 {
        let [lo, hi] = &self.branches[a.index()][i];
        lo.read(v) + hi.read(v)
    }

    #[inline]
    pub fn q_value(&self, a: Action, i: usize, v: &[f64]) -> f64 {
        self.reward[a.index()][i] + self.problem.gamma * self.continuation(a, i, v)
    }

    /// One optimality backup: `out = B v`.
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .q_value(Action::Minus, i, v)
                .max(self.q_value(Action::Plus, i, v));
        }
    }

    /// One backup of the fixed-policy recursion.
    pub fn apply_policy(&self, policy: &PolicyTable, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let d = policy.dist(i);
            *o = Sign::BOTH
                .iter()
                .filter(|&&a| d.prob(a) > 0.0)
                .map(|&a| d.prob(a) * self.q_value(a, i, v))
                .sum();
        }
    }

    /// One backup of the discounted-cost recursion with one-step costs `cost`.
    pub fn apply_cost(&self, policy: &PolicyTable, cost: &[f64], v: &[f64], out: &mut [f64]) {
        let gamma = self.problem.gamma;
        for (i, o) in out.iter_mut().enumerate() {
            let d = policy.dist(i);
            let cont: f64 = Sign::BOTH
                .iter()
                .filter(|&&a| d.prob(a) > 0.0)
                .map(|&a| d.prob(a) * self.continuation(a, i, v))
                .sum();
            *o = cost[i] + gamma * cont;
        }
    }

    fn iterate(
        &self,
        opts: SolverOptions,
        step: impl Fn(&[f64], &mut [f64]),
    ) -> Result<Solve> {
        let n = self.grid.len();
        let mut current = vec![0.0; n];
        let mut next = vec![0.0; n];
        let mut residuals = Vec::new();
        for sweep in 1..=opts.max_sweeps {
            step(&current, &mut next);
            let r = sup_distance(&current, &next);
            residuals.push(r);
            std::mem::swap(&mut current, &mut next);
            if r < opts.tol {
                return Ok(Solve {
                    value: ValueFunction::new(self.grid.clone(), current)?,
                    iterations: sweep,
                    residuals,
                });
            }
        }
        Err(Error::IterationLimit {
            max_sweeps: opts.max_sweeps,
            residual: residuals.last().copied().unwrap_or(f64::INFINITY),
        })
    }

    /// Value iteration from `V_0 = 0` until `||B V - V|| < tol`.
    pub fn value_iteration(&self, opts: SolverOptions) -> Result<Solve> {
        self.iterate(opts, |v, out| self.apply(v, out))
    }

    pub fn policy_evaluation(&self, policy: &PolicyTable, opts: SolverOptions) -> Result<Solve> {
        self.check_grid(policy.grid())?;
        self.iterate(opts, |v, out| self.apply_policy(policy, v, out))
    }

    pub fn evaluate_cost(
        &self,
        policy: &PolicyTable,
        cost: &[f64],
        opts: SolverOptions,
    ) -> Result<Solve> {
        self.check_grid(policy.grid())?;
        if cost.len() != self.grid.len() {
            return Err(Error::GridMismatch {
                expected: self.grid.len(),
                found: cost.len(),
            });
        }
        self.iterate(opts, |v, out| self.apply_cost(policy, cost, v, out))
    }

    /// Per-node argmax of the backup; ties go to the larger immediate
    /// reward, then to action +1.
    pub fn greedy_policy(&self, v: &[f64]) -> PolicyTable {
        let dists = (0..self.grid.len())
            .map(|i| {
                let q_minus = self.q_value(Action::Minus, i, v);
                let q_plus = self.q_value(Action::Plus, i, v);
                let scale = q_minus.abs().max(q_plus.abs()).max(1.0);
                let a = if (q_plus - q_minus).abs() <= TIE_EPS * scale {
                    if self.reward[0][i] > self.reward[1][i] {
                        Action::Minus
                    } else {
                        Action::Plus
                    }
                } else if q_plus > q_minus {
                    Action::Plus
                } else {
                    Action::Minus
                };
                ActionDistribution::deterministic(a)
            })
            .collect();
        PolicyTable::new(self.grid.clone(), dists).expect("one distribution per node")
    }

    /// One-step regret of `policy` at every node.
    pub fn regret_costs(&self, policy: &PolicyTable) -> Vec<f64> {
        let spec = self.problem.spec;
        self.grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(i, &beta)| spec.one_step_regret(Belief::clamped(beta), policy.dist(i)))
            .collect()
    }

    /// Entropy minus its discounted expected value after one step of
    /// `policy`, with posterior entropies read through the same
    /// interpolation stencils as the value backups. The discounted sum of
    /// these costs telescopes to the entropy of the starting belief.
    pub fn entropy_drop_costs(&self, policy: &PolicyTable) -> Vec<f64> {
        let entropy: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .map(|&b| Belief::clamped(b).entropy())
            .collect();
        let gamma = self.problem.gamma;
        (0..self.grid.len())
            .map(|i| {
                let d = policy.dist(i);
                let expected: f64 = Sign::BOTH
                    .iter()
                    .map(|&a| d.prob(a) * self.continuation(a, i, &entropy))
                    .sum();
                entropy[i] - gamma * expected
            })
            .collect()
    }

    fn check_grid(&self, other: &BeliefGrid) -> Result<()> {
        if other.len() != self.grid.len() {
            return Err(Error::GridMismatch {
                expected: self.grid.len(),
                found: other.len(),
            });
        }
        Ok(())
    }
}

/// Applies the optimality backup once to `v`.
pub fn bellman_backup(v: &ValueFunction, prob: &DiscountedProblem) -> ValueFunction {
    let op = BellmanOperator::new(*prob, v.grid());
    let mut out = vec![0.0; v.grid().len()];
    op.apply(v.values(), &mut out);
    ValueFunction::new(v.grid().clone(), out).expect("backup of a finite function is finite")
}

pub fn value_iteration(
    prob: &DiscountedProblem,
    grid: &BeliefGrid,
    opts: SolverOptions,
) -> Result<Solve> {
    BellmanOperator::new(*prob, grid).value_iteration(opts)
}

pub fn policy_evaluation(
    prob: &DiscountedProblem,
    policy: &PolicyTable,
    opts: SolverOptions,
) -> Result<Solve> {
    BellmanOperator::new(*prob, policy.grid()).policy_evaluation(policy, opts)
}

/// Discounted cumulative cost `C_f` of `policy` for per-node one-step costs `cost`.
pub fn evaluate_cost(
    prob: &DiscountedProblem,
    policy: &PolicyTable,
    cost: &[f64],
    opts: SolverOptions,
) -> Result<Solve> {
    BellmanOperator::new(*prob, policy.grid()).evaluate_cost(policy, cost, opts)
}

/// `vbar(beta) - v(beta)` at every node.
pub fn regret_curve(prob: &DiscountedProblem, v: &ValueFunction) -> ValueFunction {
    let vbar = prob.mdp_value_function(v.grid());
    let values = vbar
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a - b)
        .collect();
    ValueFunction::new(v.grid().clone(), values).expect("difference of finite functions")
}

pub fn extract_greedy_policy(prob: &DiscountedProblem, v: &ValueFunction) -> PolicyTable {
    BellmanOperator::new(*prob, v.grid()).greedy_policy(v.values())
}

/// All beliefs reachable from `beta0` in at most `depth` Bayes updates,
/// sorted, with values closer than 1e-12 merged.
pub fn reachable_beliefs(spec: &BanditSpec, beta0: f64, depth: usize) -> Result<Vec<f64>> {
    let start = Belief::new(beta0)?;
    let mut all = vec![start.beta()];
    let mut frontier = vec![start.beta()];
    for _ in 0..depth {
        let mut next = Vec::new();
        for &beta in &frontier {
            let b = Belief::clamped(beta);
            for a in Sign::BOTH {
                for y in Observation::BOTH {
                    if spec.obs_prob(b, a, y) <= 0.0 {
                        continue;
                    }
                    next.push(spec.belief_update(b, a, y)?.beta());
                }
            }
        }
        frontier = dedup_sorted(next);
        all.extend_from_slice(&frontier);
    }
    Ok(dedup_sorted(all))
}

fn dedup_sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    v
}
