//! Command-line front end: `solve`, `ids`, `compare` and `sweep`.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid parameters or
//! manifest, 3 solver non-convergence, 4 spec outside closed-form coverage.
//! Standard output carries only a short summary; data goes to files.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{FairCoinSolution, SymmetricSolution};
use crate::error::Error;
use crate::experiments::{run_manifest, RowStatus, SweepManifest};
use crate::grid::{BeliefGrid, PolicyTable, ValueFunction, DEFAULT_GRID_POINTS};
use crate::ids::{ids_policy_on_grid, ratio_table, regret_bound, BoundCheck, IdsConfig, DEFAULT_INFO_FLOOR};
use crate::io::{fmt_num, read_json, read_value_csv, write_json, write_ratio_csv, write_value_csv, SolveDocument};
use crate::model::{ActionDistribution, BanditSpec};
use crate::solver::{reachable_beliefs, regret_curve, BellmanOperator, DiscountedProblem, Solve, SolverOptions};

/// Environment variable bounding the sweep worker pool.
pub const WORKERS_ENV: &str = "IDS_BANDIT_WORKERS";

/// Relative tolerance for symmetric closed-form comparisons.
pub const SYMMETRIC_REL_TOL: f64 = 1e-3;
/// Relative tolerance for the fair-coin decision boundary; at least two grid
/// spacings are always allowed.
pub const BOUNDARY_REL_TOL: f64 = 0.1;

#[derive(Debug, Parser)]
#[command(name = "ids-bandit", version, about = "Belief-space DP and IDS for two-state Bernoulli bandits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal value, regret and policy by value iteration.
    Solve(CliConfig),
    /// IDS(alpha) policy, its value and regret, and the regret-bound check.
    Ids(IdsArgs),
    /// Closed-form versus numeric values at reachable beliefs.
    Compare(CompareArgs),
    /// Run a JSON sweep manifest.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CliConfig {
    #[arg(long)]
    pub theta_minus: f64,
    #[arg(long)]
    pub theta_plus: f64,
    #[arg(long)]
    pub gamma: f64,
    /// Number of belief grid nodes (odd).
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    /// Absolute stopping tolerance; defaults to 1e-9 / (1 - gamma).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Sweep cap; defaults to 10 ln(1/tol) / (1 - gamma).
    #[arg(long)]
    pub max_sweeps: Option<usize>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct IdsArgs {
    #[command(flatten)]
    pub config: CliConfig,
    #[arg(long)]
    pub alpha: f64,
    /// Starting belief of the regret-bound check.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta0: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub config: CliConfig,
    /// Output directory of an earlier `solve`; solved afresh when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Depth of the reachable-belief tree from beta = 0.
    #[arg(long, default_value_t = 6)]
    pub depth: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    pub manifest: PathBuf,
    /// Overrides the manifest's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("no closed form for theta_minus = {theta_minus}, theta_plus = {theta_plus}")]
    OutsideCoverage { theta_minus: f64, theta_plus: f64 },
    #[error("{WORKERS_ENV} must be a positive integer, got {0:?}")]
    Workers(String),
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::InvalidParameter { .. }
                | Error::InvalidManifest(_)
                | Error::Json(_)
                | Error::GridMismatch { .. } => 2,
                Error::IterationLimit { .. } => 3,
                Error::DegenerateTheta(_) => 4,
                _ => 1,
            },
            CliError::OutsideCoverage { .. } => 4,
            CliError::Workers(_) => 2,
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

impl CliConfig {
    pub fn problem(&self) -> CliResult<DiscountedProblem> {
        let spec = BanditSpec::new(self.theta_minus, self.theta_plus)?;
        Ok(DiscountedProblem::new(spec, self.gamma)?)
    }

    pub fn grid(&self) -> CliResult<BeliefGrid> {
        Ok(BeliefGrid::new(self.grid)?)
    }

    pub fn options(&self, prob: &DiscountedProblem) -> CliResult<SolverOptions> {
        let opts = match self.tol {
            Some(t) => SolverOptions::new(t, prob.gamma)?,
            None => SolverOptions::for_problem(prob),
        };
        Ok(match self.max_sweeps {
            Some(n) => opts.with_max_sweeps(n),
            None => opts,
        })
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Solve(c) => cmd_solve(&c, out),
        Command::Ids(a) => cmd_ids(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, workers_from_env()?, out),
    }
}

fn workers_from_env() -> CliResult<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Workers(s)),
        },
        Err(_) => Ok(None),
    }
}

fn document(
    prob: &DiscountedProblem,
    opts: &SolverOptions,
    solve: &Solve,
    policy: &PolicyTable,
    alpha: Option<f64>,
    with_table: bool,
) -> SolveDocument {
    let regret = regret_curve(prob, &solve.value);
    let table = with_table.then(|| {
        solve
            .value
            .iter()
            .zip(policy.dists())
            .map(|((b, v), d)| [b, v, d.q()])
            .collect()
    });
    SolveDocument {
        spec: prob.spec,
        gamma: prob.gamma,
        grid_points: solve.value.grid().len(),
        tol: opts.tol,
        iterations: solve.iterations,
        residual: solve.residual(),
        alpha,
        decision_boundary: policy.decision_boundary().ok(),
        regret_at_center: regret.at(0.0),
        table,
    }
}

fn write_solution(
    dir: &Path,
    stem: &str,
    format: Format,
    prob: &DiscountedProblem,
    solve: &Solve,
    policy: &PolicyTable,
    doc: &impl Serialize,
) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = dir.join(format!("{stem}.json"));
    write_json(&json, doc)?;
    let mut files = vec![json];
    if format == Format::Csv {
        let value = dir.join(format!("{stem}_value.csv"));
        let regret = dir.join(format!("{stem}_regret.csv"));
        write_value_csv(&value, &solve.value, Some(policy))?;
        write_value_csv(&regret, &regret_curve(prob, &solve.value), None)?;
        files.push(value);
        files.push(regret);
    }
    Ok(files)
}

fn print_files(out: &mut dyn Write, files: &[PathBuf]) -> CliResult<()> {
    for f in files {
        writeln!(out, "  wrote      {}", f.display())?;
    }
    Ok(())
}

fn print_header(out: &mut dyn Write, cmd: &str, prob: &DiscountedProblem, grid: usize) -> CliResult<()> {
    writeln!(
        out,
        "{cmd}: theta_minus={} theta_plus={} gamma={} grid={grid}",
        fmt_num(prob.spec.theta_minus),
        fmt_num(prob.spec.theta_plus),
        fmt_num(prob.gamma)
    )?;
    Ok(())
}

pub fn cmd_solve(c: &CliConfig, out: &mut dyn Write) -> CliResult<()> {
    let prob = c.problem()?;
    let grid = c.grid()?;
    let opts = c.options(&prob)?;
    let op = BellmanOperator::new(prob, &grid);
    let solve = op.value_iteration(opts)?;
    let policy = op.greedy_policy(solve.value.values());
    let doc = document(&prob, &opts, &solve, &policy, None, c.format == Format::Json);
    let files = write_solution(&c.out, "solve", c.format, &prob, &solve, &policy, &doc)?;

    print_header(out, "solve", &prob, grid.len())?;
    writeln!(out, "  iterations {}  residual {}", solve.iterations, fmt_num(solve.residual()))?;
    writeln!(
        out,
        "  boundary   {}",
        doc.decision_boundary.map(fmt_num).unwrap_or_else(|| "none".into())
    )?;
    writeln!(out, "  R*(0)      {}", fmt_num(doc.regret_at_center))?;
    print_files(out, &files)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdsDocument {
    #[serde(flatten)]
    pub solve: SolveDocument,
    pub bound: BoundCheck,
}

pub fn cmd_ids(a: &IdsArgs, out: &mut dyn Write) -> CliResult<()> {
    let c = &a.config;
    let prob = c.problem()?;
    let grid = c.grid()?;
    let opts = c.options(&prob)?;
    let config = IdsConfig::new(a.alpha, prob.gamma)?;
    let op = BellmanOperator::new(prob, &grid);
    let policy = ids_policy_on_grid(&prob, &grid, &config);
    let solve = op.policy_evaluation(&policy, opts)?;
    let bound = regret_bound(&prob, &policy, &solve.value, a.alpha, a.beta0, DEFAULT_INFO_FLOOR)?;
    let doc = IdsDocument {
        solve: document(&prob, &opts, &solve, &policy, Some(a.alpha), c.format == Format::Json),
        bound,
    };
    let mut files = write_solution(&c.out, "ids", c.format, &prob, &solve, &policy, &doc)?;
    let ratios = c.out.join("ids_ratios.csv");
    write_ratio_csv(&ratios, &ratio_table(&prob, &grid, &config))?;
    files.push(ratios);

    print_header(out, &format!("ids(alpha={})", fmt_num(a.alpha)), &prob, grid.len())?;
    writeln!(out, "  iterations {}  residual {}", solve.iterations, fmt_num(solve.residual()))?;
    writeln!(out, "  R_IDS(0)   {}", fmt_num(doc.solve.regret_at_center))?;
    writeln!(out, "  psi        {}", fmt_num(bound.psi))?;
    writeln!(
        out,
        "  bound      measured {} <= {} at beta0={}: {}",
        fmt_num(bound.measured),
        fmt_num(bound.bound),
        fmt_num(bound.beta0),
        if bound.holds { "holds" } else { "VIOLATED" }
    )?;
    print_files(out, &files)
}

/// Closed form available for a spec.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coverage {
    Symmetric(SymmetricSolution),
    FairCoin(FairCoinSolution),
}

impl Coverage {
    pub fn for_problem(prob: &DiscountedProblem) -> CliResult<Self> {
        let s = prob.spec;
        if s.is_symmetric() {
            Ok(Coverage::Symmetric(SymmetricSolution::new(s.theta_plus, prob.gamma)?))
        } else if s.theta_minus == 0.5 {
            Ok(Coverage::FairCoin(FairCoinSolution::new(s.theta_plus, prob.gamma)?))
        } else {
            Err(CliError::OutsideCoverage {
                theta_minus: s.theta_minus,
                theta_plus: s.theta_plus,
            })
        }
    }

    pub fn value(&self, beta: f64) -> f64 {
        match self {
            Coverage::Symmetric(s) => s.value(beta),
            Coverage::FairCoin(f) => f.value(beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub case: String,
    pub points: usize,
    pub max_abs_dev: f64,
    pub max_rel_dev: f64,
    /// Closed-form and numeric decision boundaries (fair coin only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary: Option<(f64, Option<f64>)>,
    pub tolerance: String,
    pub pass: bool,
}

/// Loads a value function (and its policy) written by `solve` in either format.
fn load_solution(dir: &Path) -> CliResult<(ValueFunction, Option<PolicyTable>)> {
    let csv = dir.join("solve_value.csv");
    if csv.exists() {
        return Ok(read_value_csv(&csv)?);
    }
    let doc: SolveDocument = read_json(&dir.join("solve.json"))?;
    let table = doc.table.ok_or_else(|| {
        Error::InvalidManifest(format!("{} has no value table", dir.join("solve.json").display()))
    })?;
    let grid = BeliefGrid::new(table.len())?;
    let value = ValueFunction::new(grid.clone(), table.iter().map(|r| r[1]).collect())?;
    let dists = table
        .iter()
        .map(|r| ActionDistribution::new(r[2]))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((value, Some(PolicyTable::new(grid, dists)?)))
}

/// Deviation metrics of a numeric value function from the closed form.
pub fn compare_with_closed_form(
    prob: &DiscountedProblem,
    value: &ValueFunction,
    policy: &PolicyTable,
    depth: usize,
) -> CliResult<(CompareReport, Vec<[f64; 3]>)> {
    let cov = Coverage::for_problem(prob)?;
    let points = reachable_beliefs(&prob.spec, 0.0, depth)?;
    let rows: Vec<[f64; 3]> = points.iter().map(|&b| [b, cov.value(b), value.at(b)]).collect();
    let max_abs_dev = rows.iter().map(|r| (r[1] - r[2]).abs()).fold(0.0, f64::max);
    let max_rel_dev = rows
        .iter()
        .map(|r| (r[1] - r[2]).abs() / r[1].abs())
        .fold(0.0, f64::max);
    let report = match cov {
        Coverage::Symmetric(_) => CompareReport {
            case: "symmetric".into(),
            points: rows.len(),
            max_abs_dev,
            max_rel_dev,
            boundary: None,
            tolerance: format!("relative value deviation <= {SYMMETRIC_REL_TOL}"),
            pass: max_rel_dev <= SYMMETRIC_REL_TOL,
        },
        Coverage::FairCoin(f) => {
            let numeric = policy.decision_boundary().ok();
            let allowed = (2.0 * value.grid().spacing()).max(BOUNDARY_REL_TOL * f.beta_c.abs());
            CompareReport {
                case: "fair_coin".into(),
                points: rows.len(),
                max_abs_dev,
                max_rel_dev,
                boundary: Some((f.beta_c, numeric)),
                tolerance: format!("boundary within max(2 spacings, {BOUNDARY_REL_TOL} relative)"),
                pass: numeric.is_some_and(|b| (b - f.beta_c).abs() <= allowed),
            }
        }
    };
    Ok((report, rows))
}

pub fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> CliResult<()> {
    let c = &a.config;
    let prob = c.problem()?;
    Coverage::for_problem(&prob)?;
    let (value, policy) = match &a.input {
        Some(dir) => {
            let (value, policy) = load_solution(dir)?;
            let policy = match policy {
                Some(p) => p,
                None => BellmanOperator::new(prob, value.grid()).greedy_policy(value.values()),
            };
            (value, policy)
        }
        None => {
            let grid = c.grid()?;
            let op = BellmanOperator::new(prob, &grid);
            let solve = op.value_iteration(c.options(&prob)?)?;
            let policy = op.greedy_policy(solve.value.values());
            (solve.value, policy)
        }
    };
    let (report, rows) = compare_with_closed_form(&prob, &value, &policy, a.depth)?;

    std::fs::create_dir_all(&c.out)?;
    let json = c.out.join("compare.json");
    write_json(&json, &report)?;
    let mut files = vec![json];
    if c.format == Format::Csv {
        let path = c.out.join("compare.csv");
        let mut w = csv::Writer::from_path(&path).map_err(Error::from)?;
        w.write_record(["beta", "analytic", "numeric"]).map_err(Error::from)?;
        for r in &rows {
            w.write_record(r.iter().map(|&x| fmt_num(x))).map_err(Error::from)?;
        }
        w.flush()?;
        files.push(path);
    }

    print_header(out, &format!("compare({})", report.case), &prob, value.grid().len())?;
    writeln!(out, "  points     {}", report.points)?;
    writeln!(out, "  max abs    {}", fmt_num(report.max_abs_dev))?;
    writeln!(out, "  max rel    {}", fmt_num(report.max_rel_dev))?;
    if let Some((closed, numeric)) = report.boundary {
        writeln!(
            out,
            "  boundary   closed form {} numeric {}",
            fmt_num(closed),
            numeric.map(fmt_num).unwrap_or_else(|| "none".into())
        )?;
    }
    writeln!(out, "  verdict    {} ({})", if report.pass { "PASS" } else { "FAIL" }, report.tolerance)?;
    print_files(out, &files)
}

pub fn cmd_sweep(a: &SweepArgs, workers: Option<usize>, out: &mut dyn Write) -> CliResult<()> {
    let text = std::fs::read_to_string(&a.manifest)?;
    let mut manifest = SweepManifest::from_json(&text)?;
    if let Some(dir) = &a.out {
        manifest.output_dir = dir.clone();
    }
    let output = run_manifest(&manifest, workers)?;
    let r = &output.result;

    writeln!(out, "sweep {} ({} rows, {} failed)", manifest.kind, r.rows.len(), r.provenance.failed_rows)?;
    writeln!(out, "{}", r.columns.join("\t"))?;
    for row in &r.rows {
        let cells: Vec<String> = row
            .params
            .iter()
            .map(|&p| fmt_num(p))
            .chain(row.metrics.iter().map(|m| m.map(fmt_num).unwrap_or_else(|| "failed".into())))
            .collect();
        write!(out, "{}", cells.join("\t"))?;
        if let RowStatus::Failed { error } = &row.status {
            write!(out, "\t# {error}")?;
        }
        writeln!(out)?;
    }
    for (name, fit) in [("optimal", &r.fit_opt), ("ids0", &r.fit_ids0)] {
        if let Some(f) = fit {
            writeln!(
                out,
                "fit {name}: R = {} + {} ln(1-gamma)  R^2 = {}",
                fmt_num(f.c1),
                fmt_num(f.c2),
                fmt_num(f.r_squared)
            )?;
        }
    }
    if let Some(best) = r.best_alpha {
        writeln!(out, "best alpha: {}", fmt_num(best))?;
    }
    writeln!(out, "wall time {:.3} s, {} sweeps", r.provenance.wall_time_secs, r.provenance.total_iterations)?;
    print_files(out, &[output.csv_path.clone(), output.json_path.clone()])
}
