//! Closed-form optimal values for the symmetric and one-fair-coin bandits.
//!
//! On each side of the decision boundary the optimal value is the
//! always-play-this-arm value plus a correction `K * b(-1)^z * b(+1)^(1-z)`.
//! The exponent solves
//! `(1 - theta)^z theta^(1 - z) + theta^z (1 - theta)^(1 - z) = 1 / gamma`,
//! which has two roots `zeta_plus < 0` and `zeta_minus > 1`
//! with `zeta_plus + zeta_minus = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two roots of the exponent equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub zeta_plus: f64,
    pub zeta_minus: f64,
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.5 && theta < 1.0) {
        return Err(Error::DegenerateTheta(theta));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "closed forms need 0 < gamma < 1",
        });
    }
    Ok(())
}

/// `1 - 4 gamma^2 theta (1 - theta)`.
fn discriminant(theta: f64, gamma: f64) -> f64 {
    1.0 - 4.0 * gamma * gamma * theta * (1.0 - theta)
}

pub fn zeta_exponents(theta: f64, gamma: f64) -> Result<Exponents> {
    check_theta(theta)?;
    check_gamma(gamma)?;
    let root = discriminant(theta, gamma).sqrt();
    let log_ratio = ((1.0 - theta) / theta).ln();
    let x_plus = (1.0 + root) / (2.0 * gamma * theta);
    // (1 - root) / (2 gamma theta), rewritten to avoid cancellation
    let x_minus = 2.0 * gamma * (1.0 - theta) / (1.0 + root);
    Ok(Exponents {
        zeta_plus: x_plus.ln() / log_ratio,
        zeta_minus: x_minus.ln() / log_ratio,
    })
}

/// Left-hand side minus right-hand side of the exponent equation.
pub fn exponent_residual(theta: f64, gamma: f64, zeta: f64) -> f64 {
    (1.0 - theta).powf(zeta) * theta.powf(1.0 - zeta) + theta.powf(zeta) * (1.0 - theta).powf(1.0 - zeta)
        - 1.0 / gamma
}

/// `(1 - beta)^z (1 + beta)^(1 - z)`.
fn shape(beta: f64, zeta: f64) -> f64 {
    if beta >= 1.0 {
        return 0.0;
    }
    (1.0 - beta).powf(zeta) * (1.0 + beta).powf(1.0 - zeta)
}

/// Exact optimal value of the symmetric bandit on the beliefs reachable
/// from `beta = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSolution {
    pub theta: f64,
    pub gamma: f64,
    pub zeta_plus: f64,
    pub zeta_minus: f64,
    /// Amplitude of `b(-1)^z b(+1)^(1-z)` in the correction term.
    pub amplitude: f64,
}

impl SymmetricSolution {
    pub fn new(theta: f64, gamma: f64) -> Result<Self> {
        let z = zeta_exponents(theta, gamma)?;
        let amplitude = gamma * (1.0 - 2.0 * theta).powi(2)
            / ((1.0 - gamma) * discriminant(theta, gamma).sqrt());
        Ok(Self {
            theta,
            gamma,
            zeta_plus: z.zeta_plus,
            zeta_minus: z.zeta_minus,
            amplitude,
        })
    }

    pub fn value(&self, beta: f64) -> f64 {
        let x = beta.abs().min(1.0);
        let delta = 2.0 * self.theta - 1.0;
        // b(-1)^z b(+1)^(1-z) = shape / 2 on the right branch; the left
        // branch is its mirror image
        (1.0 + x * delta) / (2.0 * (1.0 - self.gamma)) + self.amplitude * shape(x, self.zeta_minus) / 2.0
    }

    pub fn mdp_value(&self) -> f64 {
        self.theta / (1.0 - self.gamma)
    }

    pub fn regret(&self, beta: f64) -> f64 {
        self.mdp_value() - self.value(beta)
    }
}

pub fn symmetric_value(theta: f64, gamma: f64, beta: f64) -> Result<f64> {
    Ok(SymmetricSolution::new(theta, gamma)?.value(beta))
}

/// `gamma -> 1` limit of the optimal regret at `beta = 0`: `1 / (2 delta)`.
pub fn symmetric_regret_limit(theta: f64) -> Result<f64> {
    if !(theta > 0.5 && theta <= 1.0) {
        return Err(Error::DegenerateTheta(theta));
    }
    Ok(1.0 / (2.0 * (2.0 * theta - 1.0)))
}

/// Closed-form coefficient `c(theta)` of the expansion
/// `R*(0) = 1/(2 delta) - c(theta) (1 - gamma) + ...`, evaluated literally.
///
/// Value iteration does not bear it out: at `theta = 0.55` this gives
/// `c = -947.5`, while the regret approaches its limit from below with slope
/// `3 theta (theta - 1) / delta^3 = -742.5` in `1 - gamma`.
pub fn symmetric_regret_linear_coeff(theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let t = theta;
    let z1 = ((1.0 - t) / t).ln();
    let z2 = (2.0 * (1.0 - t)).ln();
    let z3 = (2.0 * t).ln();
    let c_prime = (2.0 * t - 3.0) * (2.0 * t * (2.0 * t - 3.0) * (4.0 * t + 1.0) + 7.0) * z2 * z2
        + 4.0 * t * z2 * (3.0 * z3 - 8.0 * z1 - 4.0 * t * (2.0 * (t - 2.0) * t + 3.0) * (8.0 * (1.0 - t) * t * t).ln())
        + z2 * (4.0 * (z2 + z3) + 13.0 * z1 + (4.0 * t * (4.0 * t * (t * (4.0 * t - 5.0) + 6.0) - 11.0) + 9.0) * z3)
        - 24.0 * t.powi(3) * z3 * z3;
    Ok(-(t - 1.0) / (8.0 * t * t * (2.0 * t - 1.0).powi(3) * z1 * z1) * c_prime)
}

/// Approximate optimal value when arm -1 is a fair coin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FairCoinSolution {
    pub theta_plus: f64,
    pub gamma: f64,
    pub zeta_minus: f64,
    pub beta_c: f64,
    pub amplitude: f64,
}

impl FairCoinSolution {
    pub fn new(theta_plus: f64, gamma: f64) -> Result<Self> {
        let z = zeta_exponents(theta_plus, gamma)?.zeta_minus;
        let beta_c = -1.0 / (2.0 * z - 1.0);
        let delta = 2.0 * theta_plus - 1.0;
        let amplitude = -2.0 * beta_c * delta / ((1.0 - gamma) * shape(beta_c, z));
        Ok(Self {
            theta_plus,
            gamma,
            zeta_minus: z,
            beta_c,
            amplitude,
        })
    }

    /// Value of always playing the fair coin.
    pub fn left_value(&self) -> f64 {
        1.0 / (2.0 * (1.0 - self.gamma))
    }

    pub fn value(&self, beta: f64) -> f64 {
        if beta < self.beta_c {
            return self.left_value();
        }
        let delta = 2.0 * self.theta_plus - 1.0;
        (1.0 + beta * delta) / (2.0 * (1.0 - self.gamma)) + self.amplitude * shape(beta, self.zeta_minus) / 4.0
    }

    pub fn mdp_value(&self, beta: f64) -> f64 {
        ((1.0 - beta) * 0.5 + (1.0 + beta) * self.theta_plus) / (2.0 * (1.0 - self.gamma))
    }

    pub fn regret(&self, beta: f64) -> f64 {
        self.mdp_value(beta) - self.value(beta)
    }
}

pub fn fair_coin_solution(theta_plus: f64, gamma: f64) -> Result<FairCoinSolution> {
    FairCoinSolution::new(theta_plus, gamma)
}

/// Least-squares fit of `R = c1 + c2 ln(1 - gamma)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRegretFit {
    pub c1: f64,
    pub c2: f64,
    pub r_squared: f64,
    /// Residual sum of squares.
    pub rss: f64,
    /// Coefficients of `[1, L, eps L^2, eps L, eps]` with `eps = 1 - gamma`
    /// and `L = ln eps`; only fitted from six samples on.
    pub expansion: Option<[f64; 5]>,
}

/// Fits `(gamma, regret)` samples.
pub fn fit_log_regret_expansion(samples: &[(f64, f64)]) -> Result<LogRegretFit> {
    if samples.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: samples.len(),
        });
    }
    for &(gamma, _) in samples {
        check_gamma(gamma)?;
    }
    let xs: Vec<f64> = samples.iter().map(|&(g, _)| (1.0 - g).ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, r)| r).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: 1,
        });
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let c2 = sxy / sxx;
    let c1 = my - c2 * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c1 - c2 * x).powi(2)).sum();
    let tss: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    let expansion = if samples.len() >= 6 {
        let design = DMatrix::from_fn(samples.len(), 5, |i, j| {
            let eps = 1.0 - samples[i].0;
            let l = xs[i];
            match j {
                0 => 1.0,
                1 => l,
                2 => eps * l * l,
                3 => eps * l,
                _ => eps,
            }
        });
        let rhs = DVector::from_vec(ys.clone());
        design
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .ok()
            .map(|c| [c[0], c[1], c[2], c[3], c[4]])
    } else {
        None
    };

    Ok(LogRegretFit {
        c1,
        c2,
        r_squared,
        rss,
        expansion,
    })
}
