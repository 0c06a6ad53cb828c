//! Parameter sweeps: regret curves over theta, scaling in the horizon,
//! IDS-vs-optimal relative regret maps and the search for the best alpha.
//!
//! A sweep is described by a [`SweepManifest`]; [`run_manifest`] executes it
//! on a worker pool and writes `<kind>_<hash>.csv` plus a JSON summary.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytic::{fit_log_regret_expansion, LogRegretFit};
use crate::error::{check_discount, check_probability, Error, Result};
use crate::grid::{BeliefGrid, ValueFunction};
use crate::ids::{ids_policy_on_grid, IdsConfig};
use crate::io::{fmt_num, write_json};
use crate::model::{BanditSpec, Belief};
use crate::solver::{BellmanOperator, DiscountedProblem, SolverOptions};

/// Absolute sweep tolerance used when a manifest gives none. Relative regret
/// gaps are taken at beliefs with regret as small as 1e-6, so the value error
/// `tol * gamma / (1 - gamma)` has to stay well below that.
pub const DEFAULT_SWEEP_TOL: f64 = 1e-11;

/// Either an explicit list or `count` evenly spaced values from `start` to `stop`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamList {
    Values(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl ParamList {
    pub fn values(&self) -> Vec<f64> {
        match self {
            ParamList::Values(v) => v.clone(),
            ParamList::Linspace { start, stop, count } => match count {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n)
                    .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
                    .collect(),
            },
        }
    }
}

impl From<Vec<f64>> for ParamList {
    fn from(v: Vec<f64>) -> Self {
        ParamList::Values(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MaxRegretCurve,
    RegretScaling,
    Heatmap,
    OptimalAlpha,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::MaxRegretCurve => "max_regret_curve",
            ExperimentKind::RegretScaling => "regret_scaling",
            ExperimentKind::Heatmap => "heatmap",
            ExperimentKind::OptimalAlpha => "optimal_alpha",
        }
    }

    /// CSV header: parameter columns followed by metric columns.
    pub fn columns(self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            ExperimentKind::MaxRegretCurve => (&["theta", "gamma"], &["max_regret"]),
            ExperimentKind::RegretScaling => (&["one_minus_gamma"], &["regret_opt", "regret_ids0"]),
            ExperimentKind::Heatmap => (&["theta_minus", "theta_plus", "alpha"], &["delta_R"]),
            ExperimentKind::OptimalAlpha => (&["alpha"], &["delta_R"]),
        }
    }

    fn default_grid_points(self) -> usize {
        match self {
            ExperimentKind::Heatmap | ExperimentKind::OptimalAlpha => 801,
            _ => crate::grid::DEFAULT_GRID_POINTS,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// JSON-serializable sweep description.
///
/// * `max_regret_curve`: `theta_plus` is the theta axis. With `symmetric`
///   both arms share theta and the metric is `max_beta R*`; otherwise the
///   minus arm is a fair coin and the metric is `R*(beta0)`.
/// * `regret_scaling`: one spec (`theta_minus`, `theta_plus`), many `gammas`.
/// * `heatmap`: `theta_minus` x `theta_plus` cells at one gamma, for every alpha.
/// * `optimal_alpha`: one spec and gamma, `alphas` is the search grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepManifest {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_minus: Option<ParamList>,
    pub theta_plus: ParamList,
    pub gammas: ParamList,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<ParamList>,
    #[serde(default)]
    pub symmetric: bool,
    #[serde(default)]
    pub beta0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_sweeps: Option<usize>,
    pub output_dir: PathBuf,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidManifest(msg.into())
}

fn nonempty(name: &str, list: &ParamList) -> Result<Vec<f64>> {
    let v = list.values();
    if v.is_empty() {
        return Err(invalid(format!("{name} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid(format!("{name} contains a non-finite value")));
    }
    Ok(v)
}

fn single(name: &str, list: &Option<ParamList>) -> Result<f64> {
    let list = list.as_ref().ok_or_else(|| invalid(format!("{name} is required")))?;
    match nonempty(name, list)?.as_slice() {
        [x] => Ok(*x),
        _ => Err(invalid(format!("{name} must hold exactly one value"))),
    }
}

fn check_thetas(name: &str, thetas: &[f64], open: bool) -> Result<()> {
    for &t in thetas {
        check_probability("theta", t).map_err(|e| invalid(format!("{name}: {e}")))?;
        if open && !(t > 0.5 && t < 1.0) {
            return Err(invalid(format!("{name}: {t} is outside (0.5, 1)")));
        }
    }
    Ok(())
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(invalid(format!("alpha {a} is outside [0, 1]")));
    }
    Ok(())
}

impl SweepManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        let m: SweepManifest =
            serde_json::from_str(text).map_err(|e| invalid(format!("manifest parse error: {e}")))?;
        m.validate()?;
        Ok(m)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn grid_points(&self) -> usize {
        self.grid_points.unwrap_or(self.kind.default_grid_points())
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_SWEEP_TOL)
    }

    /// Alphas to evaluate; heatmaps default to `[0, 0.5]`.
    pub fn alpha_values(&self) -> Vec<f64> {
        match (&self.alphas, self.kind) {
            (Some(a), _) => a.values(),
            (None, ExperimentKind::Heatmap) => vec![0.0, 0.5],
            (None, _) => Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let gammas = nonempty("gammas", &self.gammas)?;
        for &g in &gammas {
            check_discount(g).map_err(|e| invalid(format!("gammas: {e}")))?;
        }
        let theta_plus = nonempty("theta_plus", &self.theta_plus)?;
        BeliefGrid::new(self.grid_points()).map_err(|e| invalid(e.to_string()))?;
        SolverOptions::new(self.tol(), gammas[0]).map_err(|e| invalid(e.to_string()))?;
        if !(-1.0..=1.0).contains(&self.beta0) {
            return Err(invalid(format!("beta0 {} is outside [-1, 1]", self.beta0)));
        }
        match self.kind {
            ExperimentKind::MaxRegretCurve => {
                check_thetas("theta_plus", &theta_plus, false)?;
            }
            ExperimentKind::RegretScaling => {
                let tm = single("theta_minus", &self.theta_minus)?;
                check_thetas("theta_minus", &[tm], false)?;
                match theta_plus.as_slice() {
                    [tp] => check_thetas("theta_plus", &[*tp], false)?,
                    _ => return Err(invalid("theta_plus must hold exactly one value")),
                }
            }
            ExperimentKind::Heatmap => {
                let tm = nonempty(
                    "theta_minus",
                    self.theta_minus.as_ref().ok_or_else(|| invalid("theta_minus is required"))?,
                )?;
                check_thetas("theta_minus", &tm, true)?;
                check_thetas("theta_plus", &theta_plus, true)?;
                if gammas.len() != 1 {
                    return Err(invalid("heatmap takes exactly one gamma"));
                }
                let alphas = self.alpha_values();
                if alphas.is_empty() {
                    return Err(invalid("alphas is empty"));
                }
                check_alphas(&alphas)?;
            }
            ExperimentKind::OptimalAlpha => {
                let tm = single("theta_minus", &self.theta_minus)?;
                check_thetas("theta_minus", &[tm], false)?;
                match theta_plus.as_slice() {
                    [tp] => check_thetas("theta_plus", &[*tp], false)?,
                    _ => return Err(invalid("theta_plus must hold exactly one value")),
                }
                if gammas.len() != 1 {
                    return Err(invalid("optimal_alpha takes exactly one gamma"));
                }
                let alphas = nonempty(
                    "alphas",
                    self.alphas.as_ref().ok_or_else(|| invalid("alphas is required"))?,
                )?;
                check_alphas(&alphas)?;
            }
        }
        Ok(())
    }

    /// Hex prefix of the SHA-256 of the manifest's JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("manifest serializes");
        Sha256::digest(&bytes)
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

/// Grid and stopping rule shared by every job of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub grid: BeliefGrid,
    pub tol: f64,
    pub max_sweeps: Option<usize>,
}

impl SweepSettings {
    pub fn new(grid_points: usize, tol: f64) -> Result<Self> {
        Ok(Self {
            grid: BeliefGrid::new(grid_points)?,
            tol,
            max_sweeps: None,
        })
    }

    fn options(&self, gamma: f64) -> Result<SolverOptions> {
        let opts = SolverOptions::new(self.tol, gamma)?;
        Ok(match self.max_sweeps {
            Some(n) => opts.with_max_sweeps(n),
            None => opts,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RowStatus {
    Ok,
    Failed { error: String },
}

/// One parameter tuple and its metrics, in the column order of the kind.
/// Failed rows carry `None` metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub params: Vec<f64>,
    pub metrics: Vec<Option<f64>>,
    pub iterations: usize,
    #[serde(flatten)]
    pub status: RowStatus,
}

impl SweepRow {
    fn ok(params: Vec<f64>, metrics: Vec<f64>, iterations: usize) -> Self {
        Self {
            params,
            metrics: metrics.into_iter().map(Some).collect(),
            iterations,
            status: RowStatus::Ok,
        }
    }

    fn failed(params: Vec<f64>, n_metrics: usize, err: &Error) -> Self {
        Self {
            params,
            metrics: vec![None; n_metrics],
            iterations: 0,
            status: RowStatus::Failed { error: err.to_string() },
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RowStatus::Ok
    }

    pub fn metric(&self, i: usize) -> Option<f64> {
        self.metrics.get(i).copied().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub total_iterations: usize,
    pub wall_time_secs: f64,
    pub failed_rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub manifest: SweepManifest,
    pub columns: Vec<String>,
    pub rows: Vec<SweepRow>,
    /// Log-horizon fits of the optimal and IDS(0) regret (scaling sweeps).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_opt: Option<LogRegretFit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_ids0: Option<LogRegretFit>,
    /// Minimizing alpha (alpha searches).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_alpha: Option<f64>,
    pub provenance: Provenance,
}

/// Optimal regret `R*` and its solve, for one problem.
#[derive(Debug, Clone)]
pub struct OptimalRegret {
    pub regret: ValueFunction,
    pub iterations: usize,
}

fn regret_from_value(prob: &DiscountedProblem, v: &ValueFunction) -> Result<ValueFunction> {
    let grid = v.grid().clone();
    let values = grid
        .nodes()
        .iter()
        .zip(v.values())
        .map(|(&b, &val)| prob.mdp_value(Belief::clamped(b)) - val)
        .collect();
    ValueFunction::new(grid, values)
}

/// Optimal regret curve of `prob` on the settings' grid.
pub fn optimal_regret(prob: &DiscountedProblem, settings: &SweepSettings) -> Result<OptimalRegret> {
    let op = BellmanOperator::new(*prob, &settings.grid);
    let solve = op.value_iteration(settings.options(prob.gamma)?)?;
    Ok(OptimalRegret {
        regret: regret_from_value(prob, &solve.value)?,
        iterations: solve.iterations,
    })
}

/// Regret curve of IDS(alpha).
pub fn ids_regret(
    prob: &DiscountedProblem,
    alpha: f64,
    settings: &SweepSettings,
) -> Result<OptimalRegret> {
    let op = BellmanOperator::new(*prob, &settings.grid);
    ids_regret_with(&op, alpha, settings)
}

fn ids_regret_with(op: &BellmanOperator, alpha: f64, settings: &SweepSettings) -> Result<OptimalRegret> {
    let prob = *op.problem();
    let policy = ids_policy_on_grid(&prob, &settings.grid, &IdsConfig::new(alpha, prob.gamma)?);
    let solve = op.policy_evaluation(&policy, settings.options(prob.gamma)?)?;
    Ok(OptimalRegret {
        regret: regret_from_value(&prob, &solve.value)?,
        iterations: solve.iterations,
    })
}

/// Beliefs with optimal regret below this are left out of relative gaps.
pub fn regret_floor(r_opt: &ValueFunction) -> f64 {
    (1e-4 * r_opt.max()).max(1e-6)
}

/// `max_beta (R_ids - R*) / R*` over beliefs whose optimal regret reaches
/// the floor; 0 when no belief does.
pub fn relative_regret_gap(r_opt: &ValueFunction, r_ids: &ValueFunction) -> f64 {
    let floor = regret_floor(r_opt);
    r_opt
        .values()
        .iter()
        .zip(r_ids.values())
        .filter(|(&ro, _)| ro >= floor)
        .map(|(&ro, &ri)| (ri - ro) / ro)
        .fold(0.0, f64::max)
}

/// Relative regret gap of IDS(alpha) for every alpha, sharing one optimal solve.
/// Returns the gaps and the total sweep count.
pub fn delta_r_cell(
    spec: BanditSpec,
    gamma: f64,
    alphas: &[f64],
    settings: &SweepSettings,
) -> Result<(Vec<f64>, usize)> {
    let prob = DiscountedProblem::new(spec, gamma)?;
    let op = BellmanOperator::new(prob, &settings.grid);
    let opt = op.value_iteration(settings.options(gamma)?)?;
    let r_opt = regret_from_value(&prob, &opt.value)?;
    let mut iterations = opt.iterations;
    let mut gaps = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let ids = ids_regret_with(&op, alpha, settings)?;
        iterations += ids.iterations;
        gaps.push(relative_regret_gap(&r_opt, &ids.regret));
    }
    Ok((gaps, iterations))
}

/// Per `(gamma, theta)`: `max_beta R*` for symmetric specs, otherwise
/// `R*(beta0)` with a fair-coin minus arm.
pub fn max_regret_vs_theta(
    gammas: &[f64],
    thetas: &[f64],
    symmetric: bool,
    beta0: f64,
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    let jobs: Vec<(f64, f64)> = gammas
        .iter()
        .flat_map(|&g| thetas.iter().map(move |&t| (t, g)))
        .collect();
    jobs.par_iter()
        .map(|&(theta, gamma)| {
            let run = || -> Result<(f64, usize)> {
                let spec = if symmetric {
                    BanditSpec::symmetric(theta)?
                } else {
                    BanditSpec::fair_coin(theta)?
                };
                let r = optimal_regret(&DiscountedProblem::new(spec, gamma)?, settings)?;
                let metric = if symmetric { r.regret.max() } else { r.regret.at(beta0) };
                Ok((metric, r.iterations))
            };
            match run() {
                Ok((m, it)) => SweepRow::ok(vec![theta, gamma], vec![m], it),
                Err(e) => SweepRow::failed(vec![theta, gamma], 1, &e),
            }
        })
        .collect()
}

/// Per gamma: `(1 - gamma, R*(beta0), R_IDS(0)(beta0))`.
pub fn regret_scaling_gamma(
    spec: BanditSpec,
    gammas: &[f64],
    beta0: f64,
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    gammas
        .par_iter()
        .map(|&gamma| {
            let run = || -> Result<(Vec<f64>, usize)> {
                let prob = DiscountedProblem::new(spec, gamma)?;
                let op = BellmanOperator::new(prob, &settings.grid);
                let opt = op.value_iteration(settings.options(gamma)?)?;
                let r_opt = regret_from_value(&prob, &opt.value)?;
                let ids = ids_regret_with(&op, 0.0, settings)?;
                Ok((
                    vec![r_opt.at(beta0), ids.regret.at(beta0)],
                    opt.iterations + ids.iterations,
                ))
            };
            let params = vec![1.0 - gamma];
            match run() {
                Ok((m, it)) => SweepRow::ok(params, m, it),
                Err(e) => SweepRow::failed(params, 2, &e),
            }
        })
        .collect()
}

/// Per `(theta_minus, theta_plus, alpha)`: relative regret gap of IDS(alpha).
pub fn delta_r_heatmap(
    theta_minus: &[f64],
    theta_plus: &[f64],
    gamma: f64,
    alphas: &[f64],
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    let cells: Vec<(f64, f64)> = theta_minus
        .iter()
        .flat_map(|&tm| theta_plus.iter().map(move |&tp| (tm, tp)))
        .collect();
    let per_cell: Vec<Vec<SweepRow>> = cells
        .par_iter()
        .map(|&(tm, tp)| {
            let res = BanditSpec::new(tm, tp).and_then(|spec| delta_r_cell(spec, gamma, alphas, settings));
            match res {
                Ok((gaps, it)) => alphas
                    .iter()
                    .zip(gaps)
                    .enumerate()
                    // the shared solve is booked on the first alpha of the cell
                    .map(|(k, (&a, g))| SweepRow::ok(vec![tm, tp, a], vec![g], if k == 0 { it } else { 0 }))
                    .collect(),
                Err(e) => alphas
                    .iter()
                    .map(|&a| SweepRow::failed(vec![tm, tp, a], 1, &e))
                    .collect(),
            }
        })
        .collect();
    per_cell.into_iter().flatten().collect()
}

/// Relative regret gap over an alpha grid, and the minimizing alpha.
pub fn optimal_alpha_search(
    spec: BanditSpec,
    gamma: f64,
    alphas: &[f64],
    settings: &SweepSettings,
) -> (Vec<SweepRow>, Option<f64>) {
    let run = || -> Result<(OptimalRegret, BellmanOperator)> {
        let prob = DiscountedProblem::new(spec, gamma)?;
        let op = BellmanOperator::new(prob, &settings.grid);
        let opt = op.value_iteration(settings.options(gamma)?)?;
        Ok((
            OptimalRegret {
                regret: regret_from_value(&prob, &opt.value)?,
                iterations: opt.iterations,
            },
            op,
        ))
    };
    let (opt, op) = match run() {
        Ok(x) => x,
        Err(e) => {
            let rows = alphas.iter().map(|&a| SweepRow::failed(vec![a], 1, &e)).collect();
            return (rows, None);
        }
    };
    let rows: Vec<SweepRow> = alphas
        .par_iter()
        .enumerate()
        .map(|(k, &a)| match ids_regret_with(&op, a, settings) {
            Ok(ids) => {
                let it = ids.iterations + if k == 0 { opt.iterations } else { 0 };
                SweepRow::ok(vec![a], vec![relative_regret_gap(&opt.regret, &ids.regret)], it)
            }
            Err(e) => SweepRow::failed(vec![a], 1, &e),
        })
        .collect();
    let best = rows
        .iter()
        .filter_map(|r| Some((r.params[0], r.metric(0)?)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .map(|(a, _)| a);
    (rows, best)
}

fn fit_column(rows: &[SweepRow], metric: usize) -> Option<LogRegretFit> {
    let samples: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((1.0 - r.params[0], r.metric(metric)?)))
        .collect();
    fit_log_regret_expansion(&samples).ok()
}

/// Runs a validated manifest in memory, on a pool of `workers` threads
/// (rayon's default when `None`).
pub fn run_sweep(manifest: &SweepManifest, workers: Option<usize>) -> Result<SweepResult> {
    manifest.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|_| Error::InvalidParameter {
        name: "workers",
        value: workers.unwrap_or(0) as f64,
        reason: "cannot start worker pool",
    })?;

    let start = Instant::now();
    let mut settings = SweepSettings::new(manifest.grid_points(), manifest.tol())?;
    settings.max_sweeps = manifest.max_sweeps;
    let gammas = manifest.gammas.values();
    let theta_plus = manifest.theta_plus.values();
    let theta_minus = manifest.theta_minus.as_ref().map(ParamList::values).unwrap_or_default();
    let alphas = manifest.alpha_values();

    let (mut fit_opt, mut fit_ids0, mut best_alpha) = (None, None, None);
    let rows = pool.install(|| -> Result<Vec<SweepRow>> {
        Ok(match manifest.kind {
            ExperimentKind::MaxRegretCurve => {
                max_regret_vs_theta(&gammas, &theta_plus, manifest.symmetric, manifest.beta0, &settings)
            }
            ExperimentKind::RegretScaling => {
                let spec = BanditSpec::new(theta_minus[0], theta_plus[0])?;
                let rows = regret_scaling_gamma(spec, &gammas, manifest.beta0, &settings);
                fit_opt = fit_column(&rows, 0);
                fit_ids0 = fit_column(&rows, 1);
                rows
            }
            ExperimentKind::Heatmap => {
                delta_r_heatmap(&theta_minus, &theta_plus, gammas[0], &alphas, &settings)
            }
            ExperimentKind::OptimalAlpha => {
                let spec = BanditSpec::new(theta_minus[0], theta_plus[0])?;
                let (rows, best) = optimal_alpha_search(spec, gammas[0], &alphas, &settings);
                best_alpha = best;
                rows
            }
        })
    })?;

    let (params, metrics) = manifest.kind.columns();
    Ok(SweepResult {
        manifest: manifest.clone(),
        columns: params.iter().chain(metrics).map(|s| s.to_string()).collect(),
        provenance: Provenance {
            total_iterations: rows.iter().map(|r| r.iterations).sum(),
            wall_time_secs: start.elapsed().as_secs_f64(),
            failed_rows: rows.iter().filter(|r| !r.is_ok()).count(),
        },
        rows,
        fit_opt,
        fit_ids0,
        best_alpha,
    })
}

/// Writes the rows as CSV; failed metrics are written as `failed`.
pub fn write_rows_csv(path: &Path, result: &SweepResult) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&result.columns)?;
    let mut rows: Vec<&SweepRow> = result.rows.iter().collect();
    rows.sort_by(|a, b| {
        a.params
            .iter()
            .zip(&b.params)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    for row in rows {
        let rec: Vec<String> = row
            .params
            .iter()
            .map(|&p| fmt_num(p))
            .chain(row.metrics.iter().map(|m| m.map(fmt_num).unwrap_or_else(|| "failed".into())))
            .collect();
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Paths written by [`run_manifest`].
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub result: SweepResult,
    pub csv_path: PathBuf,
    pub json_path: PathBuf,
}

/// Runs the manifest and writes `<kind>_<hash>.csv` and `<kind>_<hash>.json`
/// into its output directory. Failed rows are kept in both files.
pub fn run_manifest(manifest: &SweepManifest, workers: Option<usize>) -> Result<SweepOutput> {
    let result = run_sweep(manifest, workers)?;
    let stem = format!("{}_{}", manifest.kind, manifest.hash());
    let csv_path = manifest.output_dir.join(format!("{stem}.csv"));
    let json_path = manifest.output_dir.join(format!("{stem}.json"));
    write_rows_csv(&csv_path, &result)?;
    write_json(&json_path, &result)?;
    Ok(SweepOutput {
        result,
        csv_path,
        json_path,
    })
}
