//! Discounted information-directed sampling, IDS(alpha).
//!
//! At each belief the policy picks the probability `q` of playing +1 that
//! minimizes `Delta(q)^(1/alpha) / I(q)^(1/alpha - 1)`, where `Delta` is the
//! one-step regret and `I` the discounted information function
//! `H(b) - gamma * E[H(b')]`. Both are affine in `q`.
//!
//! For `alpha = 0` the ratio is replaced by `Delta / I`, which is
//! linear-fractional in `q` and hence minimized at a pure action.

use serde::{Deserialize, Serialize};

use crate::error::{check_discount, Error, Result};
use crate::grid::{BeliefGrid, PolicyTable, ValueFunction};
use crate::model::{Action, ActionDistribution, BanditSpec, Belief, Sign};
use crate::solver::DiscountedProblem;

pub const DEFAULT_INFO_FLOOR: f64 = 1e-12;
const TERNARY_ITERATIONS: usize = 200;
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdsConfig {
    pub alpha: f64,
    pub gamma: f64,
    /// Information level below which the ratio is not trusted and the
    /// greedy action is played.
    pub info_floor: f64,
}

impl IdsConfig {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "alpha must lie in [0, 1]",
            });
        }
        check_discount(gamma)?;
        Ok(Self {
            alpha,
            gamma,
            info_floor: DEFAULT_INFO_FLOOR,
        })
    }

    pub fn with_info_floor(mut self, floor: f64) -> Result<Self> {
        if floor.is_nan() || floor <= 0.0 {
            return Err(Error::InvalidParameter {
                name: "info_floor",
                value: floor,
                reason: "information floor must be positive",
            });
        }
        self.info_floor = floor;
        Ok(self)
    }
}

/// Regret and information of both pure actions at one belief, and the
/// minimizing mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEvaluation {
    pub beta: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub info0: f64,
    pub info1: f64,
    pub q_star: ActionDistribution,
    pub delta: f64,
    pub info: f64,
    /// `Psi_alpha` at `q_star` (`Delta / I` when `alpha = 0`); `None` when the
    /// greedy guard fired.
    pub ratio: Option<f64>,
}

/// `I_pi(b) = H(b) - gamma * sum_{a,y} pi(a|b) p_b(y|a) H(b'_{ay})`.
pub fn information_function(spec: &BanditSpec, b: Belief, dist: ActionDistribution, gamma: f64) -> f64 {
    let h = b.entropy();
    let expected: f64 = Sign::BOTH
        .iter()
        .map(|&a| dist.prob(a) * spec.expected_posterior_entropy(b, a))
        .sum();
    (h - gamma * expected).max(0.0)
}

/// `Delta^(1/alpha) / I^(1/alpha - 1)` for `0 < alpha <= 1`.
pub fn info_ratio(delta: f64, info: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
            reason: "ratio exponent needs 0 < alpha <= 1",
        });
    }
    if delta <= 0.0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(delta);
    }
    if info <= 0.0 {
        return Err(Error::DegenerateRatio { delta, info });
    }
    let p = 1.0 / alpha;
    Ok((p * delta.ln() - (p - 1.0) * info.ln()).exp())
}

fn affine(at0: f64, at1: f64, q: f64) -> f64 {
    (1.0 - q) * at0 + q * at1
}

/// Minimizes the information ratio over `q` in [0, 1] at belief `b`.
pub fn ids_action_dist(spec: &BanditSpec, b: Belief, config: &IdsConfig) -> RatioEvaluation {
    let gamma = config.gamma;
    let minus = ActionDistribution::deterministic(Action::Minus);
    let plus = ActionDistribution::deterministic(Action::Plus);
    let delta0 = spec.one_step_regret(b, minus);
    let delta1 = spec.one_step_regret(b, plus);
    let info0 = information_function(spec, b, minus, gamma);
    let info1 = information_function(spec, b, plus, gamma);
    let greedy = spec.greedy_action(b);
    let greedy_q = ActionDistribution::deterministic(greedy).q();

    let finish = |q: f64, ratio: Option<f64>| RatioEvaluation {
        beta: b.beta(),
        delta0,
        delta1,
        info0,
        info1,
        q_star: ActionDistribution::new(q.clamp(0.0, 1.0)).expect("q clamped"),
        delta: affine(delta0, delta1, q),
        info: affine(info0, info1, q),
        ratio,
    };

    if info0.max(info1) < config.info_floor {
        return finish(greedy_q, None);
    }

    let alpha = config.alpha;
    if alpha == 0.0 {
        let r0 = linear_fractional(delta0, info0);
        let r1 = linear_fractional(delta1, info1);
        let (rg, ro) = if greedy_q == 1.0 { (r1, r0) } else { (r0, r1) };
        let q = if rg <= ro + TIE_EPS * ro.abs().max(f64::MIN_POSITIVE) {
            greedy_q
        } else {
            1.0 - greedy_q
        };
        let ratio = if q == 1.0 { r1 } else { r0 };
        return finish(q, Some(ratio));
    }

    // `Delta * I^(alpha - 1)` is the alpha-th power of the ratio: same
    // minimizer, no overflow for small alpha.
    let objective = |q: f64| {
        let d = affine(delta0, delta1, q);
        let i = affine(info0, info1, q);
        if d <= 0.0 {
            0.0
        } else if i <= 0.0 {
            f64::INFINITY
        } else {
            d * i.powf(alpha - 1.0)
        }
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..TERNARY_ITERATIONS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if objective(m1) <= objective(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let q_mid = 0.5 * (lo + hi);
    let f_mid = objective(q_mid);
    let slack = TIE_EPS * f_mid.abs().max(f64::MIN_POSITIVE);
    let q = if objective(greedy_q) <= f_mid + slack {
        greedy_q
    } else if objective(1.0 - greedy_q) <= f_mid + slack {
        1.0 - greedy_q
    } else {
        q_mid
    };
    let ratio = info_ratio(affine(delta0, delta1, q), affine(info0, info1, q), alpha).ok();
    finish(q, ratio)
}

fn linear_fractional(delta: f64, info: f64) -> f64 {
    if delta <= 0.0 {
        0.0
    } else if info <= 0.0 {
        f64::INFINITY
    } else {
        delta / info
    }
}

/// IDS(alpha) action distribution at every grid node.
pub fn ids_policy_on_grid(prob: &DiscountedProblem, grid: &BeliefGrid, config: &IdsConfig) -> PolicyTable {
    let dists = ratio_table(prob, grid, config)
        .into_iter()
        .map(|r| r.q_star)
        .collect();
    PolicyTable::new(grid.clone(), dists).expect("one distribution per node")
}

/// Full per-node ratio evaluations, e.g. for export.
pub fn ratio_table(prob: &DiscountedProblem, grid: &BeliefGrid, config: &IdsConfig) -> Vec<RatioEvaluation> {
    let config = IdsConfig {
        gamma: prob.gamma,
        ..*config
    };
    grid.nodes()
        .iter()
        .map(|&beta| ids_action_dist(&prob.spec, Belief::clamped(beta), &config))
        .collect()
}

/// Largest per-node ratio of `policy`, skipping nodes where both regret and
/// information are below `info_floor`. `alpha = 0` uses `Delta / I`.
pub fn sup_info_ratio(
    prob: &DiscountedProblem,
    policy: &PolicyTable,
    alpha: f64,
    info_floor: f64,
) -> f64 {
    let spec = prob.spec;
    policy
        .grid()
        .nodes()
        .iter()
        .enumerate()
        .filter_map(|(i, &beta)| {
            let b = Belief::clamped(beta);
            let d = policy.dist(i);
            let delta = spec.one_step_regret(b, d);
            let info = information_function(&spec, b, d, prob.gamma);
            if info < info_floor && delta < info_floor {
                return None;
            }
            let psi = if alpha == 0.0 {
                linear_fractional(delta, info)
            } else {
                info_ratio(delta, info, alpha).unwrap_or(f64::INFINITY)
            };
            Some(psi)
        })
        .fold(0.0, f64::max)
}

/// Outcome of checking the discounted regret bound at one starting belief.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub beta0: f64,
    pub alpha: f64,
    pub psi: f64,
    pub bound: f64,
    pub measured: f64,
    pub holds: bool,
}

/// `(Psi_alpha / (1 - gamma))^alpha * H(b0)^(1 - alpha)`, or
/// `sup(Delta / I) * H(b0)` for `alpha = 0`.
pub fn regret_bound_value(psi: f64, alpha: f64, gamma: f64, entropy0: f64) -> f64 {
    if alpha == 0.0 {
        return if entropy0 == 0.0 { 0.0 } else { psi * entropy0 };
    }
    if alpha == 1.0 {
        return psi / (1.0 - gamma);
    }
    if entropy0 == 0.0 {
        return 0.0;
    }
    (psi / (1.0 - gamma)).powf(alpha) * entropy0.powf(1.0 - alpha)
}

/// Compares the measured regret of `policy` (whose value is `policy_value`)
/// at `beta0` against the information-ratio bound. A slack of
/// `1e-6 / (1 - gamma)` absorbs solver error.
pub fn regret_bound(
    prob: &DiscountedProblem,
    policy: &PolicyTable,
    policy_value: &ValueFunction,
    alpha: f64,
    beta0: f64,
    info_floor: f64,
) -> Result<BoundCheck> {
    let b0 = Belief::new(beta0)?;
    let psi = sup_info_ratio(prob, policy, alpha, info_floor);
    let bound = regret_bound_value(psi, alpha, prob.gamma, b0.entropy());
    let measured = prob.mdp_value(b0) - policy_value.at(beta0);
    let slack = 1e-6 * prob.horizon();
    Ok(BoundCheck {
        beta0,
        alpha,
        psi,
        bound,
        measured,
        holds: measured <= bound + slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn b(beta: f64) -> Belief {
        Belief::new(beta).unwrap()
    }

    #[test]
    fn ratio_examples() {
        assert_abs_diff_eq!(info_ratio(0.2, 0.05, 0.5).unwrap(), 0.8, epsilon = 1e-14);
        assert_eq!(info_ratio(0.37, 0.0, 1.0).unwrap(), 0.37);
        assert_eq!(info_ratio(0.0, 0.4, 0.3).unwrap(), 0.0);
        assert!(matches!(
            info_ratio(0.1, 0.0, 0.5),
            Err(Error::DegenerateRatio { .. })
        ));
        assert!(info_ratio(0.1, 0.1, 0.0).is_err());
    }

    #[test]
    fn information_function_limits() {
        let spec = BanditSpec::new(0.6, 0.8).unwrap();
        let d = ActionDistribution::new(0.35).unwrap();
        for beta in [-0.8, 0.0, 0.4] {
            // myopic: information is the prior entropy alone
            assert_abs_diff_eq!(
                information_function(&spec, b(beta), d, 0.0),
                b(beta).entropy(),
                epsilon = 1e-15
            );
            // far-sighted: the mixed action's mutual information
            let mi = 0.65 * spec.mutual_information(b(beta), Sign::Minus)
                + 0.35 * spec.mutual_information(b(beta), Sign::Plus);
            let near_one = information_function(&spec, b(beta), d, 1.0 - 1e-12);
            assert_abs_diff_eq!(near_one, mi, epsilon = 1e-11);
        }
        for beta in [-1.0, 1.0] {
            assert_eq!(information_function(&spec, b(beta), d, 0.9), 0.0);
        }
    }

    #[test]
    fn symmetric_spec_plays_greedy() {
        let spec = BanditSpec::symmetric(0.65).unwrap();
        for alpha in [0.0, 0.25, 0.5, 1.0] {
            let cfg = IdsConfig::new(alpha, 0.99).unwrap();
            for beta in [-0.9, -0.01, 0.0, 0.01, 0.5] {
                let r = ids_action_dist(&spec, b(beta), &cfg);
                let greedy = ActionDistribution::deterministic(spec.greedy_action(b(beta)));
                assert_eq!(r.q_star, greedy, "alpha {alpha} beta {beta}");
            }
        }
    }

    #[test]
    fn fair_coin_ids0_explores_just_left_of_zero() {
        let spec = BanditSpec::fair_coin(0.7).unwrap();
        let cfg = IdsConfig::new(0.0, 0.99).unwrap();
        let r = ids_action_dist(&spec, b(-0.05), &cfg);
        // endpoint oracle
        let ratio0 = r.delta0 / r.info0;
        let ratio1 = r.delta1 / r.info1;
        assert!(ratio1 < ratio0);
        assert_eq!(r.q_star.q(), 1.0);
        // greedy would have played the fair coin here
        assert_eq!(spec.greedy_action(b(-0.05)), Sign::Minus);
    }

    #[test]
    fn alpha_zero_returns_pure_actions() {
        let spec = BanditSpec::new(0.6, 0.9).unwrap();
        let cfg = IdsConfig::new(0.0, 0.95).unwrap();
        for k in 0..=40 {
            let beta = -1.0 + 0.05 * k as f64;
            let q = ids_action_dist(&spec, Belief::clamped(beta), &cfg).q_star.q();
            assert!(q == 0.0 || q == 1.0);
        }
    }

    #[test]
    fn guard_returns_greedy_at_certainty() {
        let spec = BanditSpec::new(0.6, 0.9).unwrap();
        let cfg = IdsConfig::new(0.5, 0.95).unwrap();
        for beta in [-1.0, 1.0] {
            let r = ids_action_dist(&spec, b(beta), &cfg);
            assert!(r.ratio.is_none());
            assert_eq!(r.q_star, ActionDistribution::deterministic(spec.greedy_action(b(beta))));
        }
    }

    #[test]
    fn bound_formula_edges() {
        assert_abs_diff_eq!(regret_bound_value(0.3, 1.0, 0.9, 0.5), 3.0, epsilon = 1e-12);
        assert_eq!(regret_bound_value(0.3, 0.5, 0.9, 0.0), 0.0);
        assert_eq!(regret_bound_value(0.3, 0.0, 0.9, 0.0), 0.0);
        assert_abs_diff_eq!(
            regret_bound_value(0.2, 0.5, 0.99, 2f64.ln()),
            (0.2f64 / 0.01).sqrt() * 2f64.ln().sqrt(),
            epsilon = 1e-12
        );
    }
}
