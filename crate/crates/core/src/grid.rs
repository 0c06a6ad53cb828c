//! Uniform discretization of the belief line and functions stored on it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Action, ActionDistribution};

/// Default number of grid nodes.
pub const DEFAULT_GRID_POINTS: usize = 2001;

/// Snap distance, in units of the spacing, under which a lookup is treated
/// as landing exactly on a node.
const NODE_SNAP: f64 = 1e-9;

/// Odd number of uniformly spaced nodes on [-1, 1], including -1, 0 and 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct BeliefGrid {
    nodes: Vec<f64>,
}

impl BeliefGrid {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 3 || n_points.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "grid",
                value: n_points as f64,
                reason: "grid size must be odd and at least 3",
            });
        }
        let m = (n_points - 1) as f64;
        // integer numerators keep the nodes exactly symmetric about 0
        let nodes = (0..n_points)
            .map(|i| (2.0 * i as f64 - m) / m)
            .collect();
        Ok(Self { nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> f64 {
        self.nodes[i]
    }

    pub fn spacing(&self) -> f64 {
        2.0 / (self.len() - 1) as f64
    }

    pub fn center(&self) -> usize {
        self.len() / 2
    }

    /// Index of the node nearest to `beta`.
    pub fn nearest(&self, beta: f64) -> usize {
        let t = (beta.clamp(-1.0, 1.0) + 1.0) / self.spacing();
        (t.round() as usize).min(self.len() - 1)
    }

    /// Bracketing cell of `beta`: returns `(lo, w)` such that the linear
    /// interpolant is `(1 - w) f[lo] + w f[lo + 1]`, with `lo <= len - 2`.
    pub fn locate(&self, beta: f64) -> (usize, f64) {
        let last = self.len() - 2;
        let t = (beta.clamp(-1.0, 1.0) + 1.0) / self.spacing();
        let mut lo = (t.floor() as usize).min(last);
        let mut w = t - lo as f64;
        if w < NODE_SNAP {
            w = 0.0;
        } else if w > 1.0 - NODE_SNAP {
            if lo < last {
                lo += 1;
                w = 0.0;
            } else {
                w = 1.0;
            }
        }
        (lo, w.clamp(0.0, 1.0))
    }

    pub fn interpolate(&self, values: &[f64], beta: f64) -> f64 {
        let (lo, w) = self.locate(beta);
        if w == 0.0 {
            values[lo]
        } else if w == 1.0 {
            values[lo + 1]
        } else {
            (1.0 - w) * values[lo] + w * values[lo + 1]
        }
    }
}

impl TryFrom<usize> for BeliefGrid {
    type Error = Error;

    fn try_from(n: usize) -> Result<Self> {
        BeliefGrid::new(n)
    }
}

impl From<BeliefGrid> for usize {
    fn from(g: BeliefGrid) -> usize {
        g.len()
    }
}

impl Default for BeliefGrid {
    fn default() -> Self {
        BeliefGrid::new(DEFAULT_GRID_POINTS).expect("default grid is valid")
    }
}

/// Node values on a belief grid, read off-node by linear interpolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction {
    grid: BeliefGrid,
    values: Vec<f64>,
}

impl ValueFunction {
    pub fn new(grid: BeliefGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "value",
                value: *bad,
                reason: "value functions must be finite",
            });
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: BeliefGrid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: BeliefGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&b| f(b)).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &BeliefGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, beta: f64) -> f64 {
        self.grid.interpolate(&self.values, beta)
    }

    /// Max-norm distance to another function on the same grid.
    pub fn sup_distance(&self, other: &ValueFunction) -> f64 {
        sup_distance(&self.values, &other.values)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(beta, value)` pairs in grid order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.grid.nodes().iter().copied().zip(self.values.iter().copied())
    }
}

pub(crate) fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// One action distribution per grid node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyTable {
    grid: BeliefGrid,
    dists: Vec<ActionDistribution>,
}

impl PolicyTable {
    pub fn new(grid: BeliefGrid, dists: Vec<ActionDistribution>) -> Result<Self> {
        if dists.len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: dists.len(),
            });
        }
        Ok(Self { grid, dists })
    }

    pub fn constant(grid: BeliefGrid, dist: ActionDistribution) -> Self {
        let dists = vec![dist; grid.len()];
        Self { grid, dists }
    }

    pub fn grid(&self) -> &BeliefGrid {
        &self.grid
    }

    pub fn dists(&self) -> &[ActionDistribution] {
        &self.dists
    }

    pub fn dist(&self, i: usize) -> ActionDistribution {
        self.dists[i]
    }

    /// Switching point between the regions preferring -1 and +1: the
    /// midpoint of the two nodes where the preferred action flips.
    pub fn decision_boundary(&self) -> Result<f64> {
        let prefs: Vec<Action> = self.dists.iter().map(|d| d.preferred()).collect();
        let flips: Vec<usize> = prefs
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(i, _)| i)
            .collect();
        match flips.as_slice() {
            [] => Err(Error::NoBoundary),
            [i] => Ok(0.5 * (self.grid.node(*i) + self.grid.node(*i + 1))),
            many => Err(Error::MultipleBoundaries { count: many.len() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sign;

    #[test]
    fn grid_layout() {
        let g = BeliefGrid::new(5).unwrap();
        assert_eq!(g.nodes(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert_eq!(g.spacing(), 0.5);
        let g = BeliefGrid::new(2001).unwrap();
        assert_eq!(g.node(g.center()), 0.0);
        for i in 0..g.len() {
            assert_eq!(g.node(i), -g.node(g.len() - 1 - i));
        }
        assert!(BeliefGrid::new(4).is_err());
        assert!(BeliefGrid::new(1).is_err());
    }

    #[test]
    fn interpolation_is_exact_on_nodes_and_linear_between() {
        let g = BeliefGrid::new(801).unwrap();
        let v = ValueFunction::from_fn(g.clone(), |b| (3.0 * b).sin() + b * b);
        for (i, &b) in g.nodes().iter().enumerate() {
            assert_eq!(v.at(b), v.values()[i]);
        }
        let lin = ValueFunction::from_fn(g, |b| 2.0 * b - 0.25);
        for beta in [-0.99931, -0.3337, 0.0001, 0.77777, 1.0] {
            assert!((lin.at(beta) - (2.0 * beta - 0.25)).abs() < 1e-14);
        }
    }

    #[test]
    fn boundary_extraction() {
        let g = BeliefGrid::new(5).unwrap();
        let minus = ActionDistribution::deterministic(Sign::Minus);
        let plus = ActionDistribution::deterministic(Sign::Plus);
        let p = PolicyTable::new(g.clone(), vec![minus, minus, plus, plus, plus]).unwrap();
        assert_eq!(p.decision_boundary().unwrap(), -0.25);
        let p = PolicyTable::constant(g.clone(), plus);
        assert!(matches!(p.decision_boundary(), Err(Error::NoBoundary)));
        let p = PolicyTable::new(g, vec![minus, plus, minus, plus, plus]).unwrap();
        assert!(matches!(
            p.decision_boundary(),
            Err(Error::MultipleBoundaries { count: 3 })
        ));
    }

    #[test]
    fn rejects_mismatched_and_non_finite_values() {
        let g = BeliefGrid::new(5).unwrap();
        assert!(ValueFunction::new(g.clone(), vec![0.0; 4]).is_err());
        assert!(ValueFunction::new(g, vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
    }
}
