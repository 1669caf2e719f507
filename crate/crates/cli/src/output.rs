//! Artifact files. Reals in CSV files carry 17 significant digits so that
//! reading them back reproduces the in-memory values exactly.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use magtor_core::{PotentialPath, ResidualBundle, SolveResult, TimeAxis};

use crate::error::CliError;

pub fn real(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub const TRACE_HEADER: [&str; 5] = ["iter", "lambda", "lh", "grad_linf", "min_eig"];

pub const RESIDUAL_HEADER: [&str; 8] = [
    "t_index",
    "geodesic_l2",
    "geodesic_linf",
    "magnetic_derived_l2",
    "magnetic_derived_linf",
    "magnetic_literal_l2",
    "magnetic_literal_linf",
    "hcma_linf",
];

/// One row per trace record of every stage; `iter` restarts at 0 per stage.
pub fn write_trace(path: &Path, result: &SolveResult) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRACE_HEADER)?;
    for stage in &result.stages {
        for r in &stage.records {
            w.write_record([
                r.iteration.to_string(),
                real(r.lambda),
                real(r.lh),
                real(r.grad_linf),
                real(r.min_eig),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_residuals(path: &Path, res: &ResidualBundle) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(RESIDUAL_HEADER)?;
    let rows = res
        .geodesic
        .knots()
        .iter()
        .zip(res.magnetic_derived.knots())
        .zip(res.magnetic_literal.knots())
        .zip(res.hcma.knots());
    for (((g, d), l), h) in rows {
        w.write_record([
            g.knot.to_string(),
            real(g.l2),
            real(g.linf),
            real(d.l2),
            real(d.linf),
            real(l.l2),
            real(l.linf),
            real(h.linf),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_energy(path: &Path, time: TimeAxis, profile: &[f64]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t_index", "t", "energy"])?;
    for (i, e) in profile.iter().enumerate() {
        let k = i + 1;
        w.write_record([k.to_string(), real(time.knot(k)), real(*e)])?;
    }
    w.flush()?;
    Ok(())
}

/// Grid metadata and every slice's values in grid order (x fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDump {
    pub dim: usize,
    pub points: Vec<usize>,
    #[serde(rename = "box")]
    pub bounds: Vec<[f64; 2]>,
    pub steps: usize,
    pub tau: f64,
    pub background: Vec<f64>,
    pub slices: Vec<Vec<f64>>,
}

impl PathDump {
    pub fn new(path: &PotentialPath) -> Self {
        let grid = path.grid();
        Self {
            dim: grid.dim(),
            points: grid.points().to_vec(),
            bounds: (0..grid.dim())
                .map(|a| {
                    let (lo, hi) = grid.bounds(a);
                    [lo, hi]
                })
                .collect(),
            steps: path.time().steps(),
            tau: path.time().tau(),
            background: path.background().f0().values().to_vec(),
            slices: path.slices().iter().map(|s| s.values().to_vec()).collect(),
        }
    }
}
