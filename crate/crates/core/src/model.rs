//! The two-state two-armed Bernoulli bandit.
//!
//! The hidden state `s` and the action `a` both take values in {-1, +1}.
//! Arm `a` pays with probability `theta_a` when `s == a` and with
//! probability `1 - theta_a` otherwise, so each arm is the better one in its
//! namesake state whenever both `theta`s exceed 1/2.
//!
//! A belief over the two states is stored as the scalar `beta` with
//! `b(s) = (1 + s * beta) / 2`.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// A value in {-1, +1}; used both for hidden states and for actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Minus,
    Plus,
}

pub type State = Sign;
pub type Action = Sign;

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Minus, Sign::Plus];

    pub fn value(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            Sign::Plus => 1.0,
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Minus => -1,
            Sign::Plus => 1,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Sign::Minus => 0,
            Sign::Plus => 1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Minus => Sign::Plus,
            Sign::Plus => Sign::Minus,
        }
    }

    pub fn from_i8(v: i8) -> Option<Sign> {
        match v {
            -1 => Some(Sign::Minus),
            1 => Some(Sign::Plus),
            _ => None,
        }
    }
}

/// Binary outcome of a pull; the reward equals the outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Observation {
    Loss,
    Win,
}

impl Observation {
    pub const BOTH: [Observation; 2] = [Observation::Loss, Observation::Win];

    pub fn reward(self) -> f64 {
        match self {
            Observation::Loss => 0.0,
            Observation::Win => 1.0,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            Observation::Loss => 0,
            Observation::Win => 1,
        }
    }
}

/// Posterior over the two hidden states, parametrized by `beta` in [-1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Belief {
    beta: f64,
}

impl Belief {
    pub fn new(beta: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter {
                name: "beta",
                value: beta,
                reason: "belief parameter must lie in [-1, 1]",
            });
        }
        Ok(Self { beta })
    }

    /// Builds a belief, clamping the parameter into [-1, 1].
    pub fn clamped(beta: f64) -> Self {
        Self {
            beta: beta.clamp(-1.0, 1.0),
        }
    }

    pub const UNIFORM: Belief = Belief { beta: 0.0 };

    pub fn beta(self) -> f64 {
        self.beta
    }

    /// Probability assigned to state `s`.
    pub fn prob(self, s: State) -> f64 {
        (1.0 + s.value() * self.beta) / 2.0
    }

    /// Shannon entropy in nats, with `0 ln 0 = 0`.
    pub fn entropy(self) -> f64 {
        Sign::BOTH
            .iter()
            .map(|&s| {
                let p = self.prob(s);
                if p > 0.0 {
                    -p * p.ln()
                } else {
                    0.0
                }
            })
            .sum()
    }
}

/// Probability of selecting action +1; action -1 gets the complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionDistribution {
    q: f64,
}

impl ActionDistribution {
    pub fn new(q: f64) -> Result<Self> {
        check_probability("q", q)?;
        Ok(Self { q })
    }

    pub fn deterministic(a: Action) -> Self {
        match a {
            Action::Minus => Self { q: 0.0 },
            Action::Plus => Self { q: 1.0 },
        }
    }

    pub fn q(self) -> f64 {
        self.q
    }

    pub fn prob(self, a: Action) -> f64 {
        match a {
            Action::Minus => 1.0 - self.q,
            Action::Plus => self.q,
        }
    }

    /// The action holding at least half of the mass; +1 on an even split.
    pub fn preferred(self) -> Action {
        if self.q >= 0.5 {
            Action::Plus
        } else {
            Action::Minus
        }
    }
}

/// A problem instance: one win parameter per arm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditSpec {
    pub theta_minus: f64,
    pub theta_plus: f64,
}

impl BanditSpec {
    pub fn new(theta_minus: f64, theta_plus: f64) -> Result<Self> {
        check_probability("theta_minus", theta_minus)?;
        check_probability("theta_plus", theta_plus)?;
        Ok(Self {
            theta_minus,
            theta_plus,
        })
    }

    pub fn symmetric(theta: f64) -> Result<Self> {
        Self::new(theta, theta)
    }

    /// Arm -1 is a fair coin, arm +1 has win probability `theta_plus`.
    pub fn fair_coin(theta_plus: f64) -> Result<Self> {
        Self::new(0.5, theta_plus)
    }

    pub fn is_symmetric(&self) -> bool {
        self.theta_minus == self.theta_plus
    }

    pub fn theta(&self, a: Action) -> f64 {
        match a {
            Action::Minus => self.theta_minus,
            Action::Plus => self.theta_plus,
        }
    }

    /// `2 theta_a - 1`; zero for an informationless arm.
    pub fn bias(&self, a: Action) -> f64 {
        2.0 * self.theta(a) - 1.0
    }

    /// Win probability of action `a` in state `s`, which is also `E[R | s, a]`.
    pub fn win_prob(&self, s: State, a: Action) -> f64 {
        if s == a {
            self.theta(a)
        } else {
            1.0 - self.theta(a)
        }
    }

    /// `p(y | s, a)`.
    pub fn likelihood(&self, y: Observation, s: State, a: Action) -> f64 {
        let w = self.win_prob(s, a);
        match y {
            Observation::Win => w,
            Observation::Loss => 1.0 - w,
        }
    }

    /// Predictive probability `p_b(y | a) = sum_s b(s) p(y | s, a)`.
    pub fn obs_prob(&self, b: Belief, a: Action, y: Observation) -> f64 {
        Sign::BOTH
            .iter()
            .map(|&s| b.prob(s) * self.likelihood(y, s, a))
            .sum()
    }

    /// Expected immediate reward `[1 + a beta (2 theta_a - 1)] / 2`.
    pub fn expected_reward(&self, b: Belief, a: Action) -> f64 {
        (1.0 + a.value() * b.beta() * self.bias(a)) / 2.0
    }

    /// Best reward available when the state is known.
    pub fn best_reward(&self, s: State) -> f64 {
        self.win_prob(s, Action::Minus)
            .max(self.win_prob(s, Action::Plus))
    }

    /// Action maximizing the immediate expected reward; +1 on ties.
    pub fn greedy_action(&self, b: Belief) -> Action {
        if self.expected_reward(b, Action::Plus) >= self.expected_reward(b, Action::Minus) {
            Action::Plus
        } else {
            Action::Minus
        }
    }

    /// Bayes posterior after playing `a` and observing `y`.
    pub fn belief_update(&self, b: Belief, a: Action, y: Observation) -> Result<Belief> {
        let plus = b.prob(Sign::Plus) * self.likelihood(y, Sign::Plus, a);
        let minus = b.prob(Sign::Minus) * self.likelihood(y, Sign::Minus, a);
        let evidence = plus + minus;
        if evidence <= 0.0 {
            return Err(Error::ZeroLikelihood {
                beta: b.beta(),
                action: a.as_i8(),
                observation: y.as_u8(),
            });
        }
        Ok(Belief::clamped((plus - minus) / evidence))
    }

    /// Mutual information between state and observation for action `a`, in nats.
    pub fn mutual_information(&self, b: Belief, a: Action) -> f64 {
        let mut total = 0.0;
        for y in Observation::BOTH {
            let marginal = self.obs_prob(b, a, y);
            for s in Sign::BOTH {
                let joint = b.prob(s) * self.likelihood(y, s, a);
                if joint > 0.0 {
                    total += joint * (self.likelihood(y, s, a) / marginal).ln();
                }
            }
        }
        total.max(0.0)
    }

    /// Expected posterior entropy `sum_y p_b(y | a) H(b'_{ay})`.
    pub fn expected_posterior_entropy(&self, b: Belief, a: Action) -> f64 {
        Observation::BOTH
            .iter()
            .map(|&y| {
                let p = self.obs_prob(b, a, y);
                match self.belief_update(b, a, y) {
                    Ok(post) if p > 0.0 => p * post.entropy(),
                    _ => 0.0,
                }
            })
            .sum()
    }

    /// Expected shortfall of action `a` against the state-optimal action.
    pub fn gap(&self, b: Belief, a: Action) -> f64 {
        Sign::BOTH
            .iter()
            .map(|&s| b.prob(s) * (self.best_reward(s) - self.win_prob(s, a)))
            .sum()
    }

    /// One-step regret of a randomized action; affine in `q`.
    pub fn one_step_regret(&self, b: Belief, dist: ActionDistribution) -> f64 {
        (1.0 - dist.q()) * self.gap(b, Action::Minus) + dist.q() * self.gap(b, Action::Plus)
    }
}
