//! CSV and JSON formats for value functions, policies and ratio tables.
//!
//! All numbers are written with 12 significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BeliefGrid, PolicyTable, ValueFunction};
use crate::ids::RatioEvaluation;
use crate::model::{ActionDistribution, BanditSpec};

const SIGNIFICANT_DIGITS: i32 = 12;

/// Formats `x` with 12 significant digits, trimming trailing zeros.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-4..SIGNIFICANT_DIGITS).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS - 1 - exp).max(0) as usize;
        let s = format!("{:.*}", decimals, x);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        if s == "-0" {
            "0".to_string()
        } else {
            s
        }
    } else {
        format!("{:.*e}", (SIGNIFICANT_DIGITS - 1) as usize, x)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(BufWriter::new(File::create(path)?))
}

/// Writes `beta,value` rows, plus a `q` column when a policy is given.
pub fn write_value_csv(path: &Path, value: &ValueFunction, policy: Option<&PolicyTable>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    match policy {
        Some(_) => w.write_record(["beta", "value", "q"])?,
        None => w.write_record(["beta", "value"])?,
    }
    for (i, (beta, v)) in value.iter().enumerate() {
        let mut rec = vec![fmt_num(beta), fmt_num(v)];
        if let Some(p) = policy {
            rec.push(fmt_num(p.dist(i).q()));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_value_csv`]; the grid is rebuilt from the
/// row count and checked against the `beta` column.
pub fn read_value_csv(path: &Path) -> Result<(ValueFunction, Option<PolicyTable>)> {
    let mut r = csv::Reader::from_path(path)?;
    let has_q = r.headers()?.iter().any(|h| h == "q");
    let mut betas = Vec::new();
    let mut values = Vec::new();
    let mut qs = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| Error::InvalidManifest(format!("bad numeric field {i} in {}", path.display())))
        };
        betas.push(field(0)?);
        values.push(field(1)?);
        if has_q {
            qs.push(field(2)?);
        }
    }
    let grid = BeliefGrid::new(betas.len())?;
    for (b, node) in betas.iter().zip(grid.nodes()) {
        if (b - node).abs() > 1e-9 {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: betas.len(),
            });
        }
    }
    let policy = if has_q {
        let dists = qs
            .into_iter()
            .map(ActionDistribution::new)
            .collect::<Result<Vec<_>>>()?;
        Some(PolicyTable::new(grid.clone(), dists)?)
    } else {
        None
    };
    Ok((ValueFunction::new(grid, values)?, policy))
}

/// Writes per-node ratio evaluations.
pub fn write_ratio_csv(path: &Path, rows: &[RatioEvaluation]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(["beta", "delta0", "delta1", "info0", "info1", "q_star", "ratio"])?;
    for r in rows {
        w.write_record([
            fmt_num(r.beta),
            fmt_num(r.delta0),
            fmt_num(r.delta1),
            fmt_num(r.info0),
            fmt_num(r.info1),
            fmt_num(r.q_star.q()),
            r.ratio.map(fmt_num).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// JSON description of a solved value function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDocument {
    pub spec: BanditSpec,
    pub gamma: f64,
    pub grid_points: usize,
    pub tol: f64,
    pub iterations: usize,
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub decision_boundary: Option<f64>,
    pub regret_at_center: f64,
    /// `[beta, value, q]` triples; only present in the JSON output format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 3]>>,
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, doc)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}
