//! Exact belief-space dynamic programming for two-state two-armed Bernoulli
//! bandits, the discounted IDS(alpha) policy family, closed-form solutions of
//! the symmetric and one-fair-coin subclasses, and parameter sweeps.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod experiments;
pub mod grid;
pub mod ids;
pub mod io;
pub mod model;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{BeliefGrid, PolicyTable, ValueFunction};
pub use model::{Action, ActionDistribution, BanditSpec, Belief, Observation, Sign, State};
pub use solver::{DiscountedProblem, SolverOptions};
