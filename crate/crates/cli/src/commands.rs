//! The three batch runs. Each writes its artifacts into `out` and returns
//! the process exit code together with a one-line summary.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use magtor_core::{
    energy_profile, geodesic_residual, gradient_check, hcma_residual, solve, solve_from_path,
    CouplingConfig, GradCheckOptions, InitialPath, SolveResult, SolverConfig, Stencil,
    VelocityForm,
};

use crate::error::CliError;
use crate::output::{write_energy, write_json, write_residuals, write_trace, PathDump};
use crate::scenario::Resolved;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub exit_code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckRow {
    pub direction_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_error: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckCase {
    pub velocity_form: VelocityForm,
    pub lambda: f64,
    pub passed: bool,
    pub entries: Vec<GradCheckRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub passed: bool,
    pub initial_path: InitialPath,
    pub epsilon: f64,
    pub stencil: Stencil,
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    pub seed: u64,
    pub checks: Vec<GradCheckCase>,
}

fn prepare(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)?;
    Ok(())
}

pub fn run_gradcheck(r: &Resolved, out: &Path) -> Result<Outcome, CliError> {
    prepare(out)?;
    let spec = &r.scenario.gradcheck;
    let (path, label) = r.initial_path()?;
    let lambdas = spec
        .lambdas
        .clone()
        .unwrap_or_else(|| r.scenario.coupling.lambda_schedule.clone());
    let opts = GradCheckOptions {
        directions: spec.directions,
        epsilon: spec.epsilon,
        seed: r.scenario.seed,
        stencil: spec.stencil,
    };
    let mut checks = Vec::new();
    for form in [VelocityForm::Derived, VelocityForm::Literal] {
        for &lambda in &lambdas {
            let cfg = CouplingConfig::new(lambda, form)
                .map_err(|e| CliError::Config(format!("gradcheck: {e}")))?;
            let entries = gradient_check(&path, &cfg, &opts);
            let passed = entries
                .iter()
                .all(|e| e.passes(spec.rel_tolerance, spec.abs_tolerance));
            checks.push(GradCheckCase {
                velocity_form: form,
                lambda,
                passed,
                entries: entries
                    .into_iter()
                    .map(|e| GradCheckRow {
                        direction_index: e.direction_index,
                        analytic: e.analytic,
                        numeric: e.numeric,
                        abs_error: e.abs_error,
                        rel_error: e.rel_error,
                    })
                    .collect(),
            });
        }
    }
    let report = GradCheckReport {
        passed: checks.iter().all(|c| c.passed),
        initial_path: label,
        epsilon: spec.epsilon,
        stencil: spec.stencil,
        rel_tolerance: spec.rel_tolerance,
        abs_tolerance: spec.abs_tolerance,
        seed: r.scenario.seed,
        checks,
    };
    let file = out.join("gradcheck.json");
    write_json(&file, &report)?;
    let worst = report
        .checks
        .iter()
        .flat_map(|c| &c.entries)
        .map(|e| e.rel_error)
        .fold(0.0, f64::max);
    Ok(Outcome {
        exit_code: if report.passed { 0 } else { 1 },
        summary: format!(
            "gradcheck {}: {} cases, worst relative error {worst:e}",
            if report.passed { "passed" } else { "FAILED" },
            report.checks.len()
        ),
        files: vec![file],
    })
}

/// Runs the solver the way the scenario asks: equal endpoints and linear
/// starts go through the endpoint solver, oracle starts through the given path.
pub fn solve_scenario(r: &Resolved, cfg: &SolverConfig) -> Result<SolveResult, CliError> {
    let same = r.phi0.phi() == r.phi1.phi();
    if cfg.initial_path == InitialPath::Oracle && !same {
        let (start, label) = r.initial_path()?;
        Ok(solve_from_path(start, cfg, label)?)
    } else {
        let cfg = SolverConfig {
            initial_path: InitialPath::Linear,
            ..cfg.clone()
        };
        Ok(solve(&r.phi0, &r.phi1, r.time, &cfg)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageSummary {
    pub lambda: f64,
    pub converged: bool,
    pub iterations: usize,
    pub final_grad_linf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub final_gradient_linf: f64,
    pub initial_path: InitialPath,
    pub stages: Vec<StageSummary>,
    pub geodesic_linf: f64,
    pub magnetic_derived_linf: f64,
    pub magnetic_literal_linf: f64,
    pub hcma_linf: f64,
    /// Half-intervals where `F₀ + φ̇` is not strictly convex.
    pub nonconvex_velocity: Vec<usize>,
}

pub fn run_solve(r: &Resolved, out: &Path) -> Result<Outcome, CliError> {
    prepare(out)?;
    let result = solve_scenario(r, &r.solver)?;
    let files = vec![
        out.join("trace.csv"),
        out.join("residuals.csv"),
        out.join("path.json"),
        out.join("energy_profile.csv"),
        out.join("summary.json"),
    ];
    write_trace(&files[0], &result)?;
    write_residuals(&files[1], &result.residuals)?;
    write_json(&files[2], &PathDump::new(&result.path))?;
    write_energy(&files[3], r.time, &energy_profile(&result.path))?;
    let res = &result.residuals;
    let summary = SolveSummary {
        converged: result.converged,
        iterations: result.iterations,
        final_gradient_linf: result.final_gradient_linf,
        initial_path: result.initial_path,
        stages: result
            .stages
            .iter()
            .map(|s| StageSummary {
                lambda: s.lambda,
                converged: s.converged,
                iterations: s.records.len() - 1,
                final_grad_linf: s.records.last().map_or(0.0, |x| x.grad_linf),
            })
            .collect(),
        geodesic_linf: res.geodesic.max_linf(),
        magnetic_derived_linf: res.magnetic_derived.max_linf(),
        magnetic_literal_linf: res.magnetic_literal.max_linf(),
        hcma_linf: res.hcma.max_linf(),
        nonconvex_velocity: result.nonconvex_velocity.clone(),
    };
    write_json(&files[4], &summary)?;
    Ok(Outcome {
        exit_code: if result.converged { 0 } else { 1 },
        summary: format!(
            "solve {} after {} iterations, gradient {:e}",
            if result.converged {
                "converged"
            } else {
                "did NOT converge"
            },
            result.iterations,
            result.final_gradient_linf
        ),
        files,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCompareReport {
    /// Max over slices and trusted nodes of `|φ_solver − φ_oracle|`.
    pub linf_distance: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub geodesic_residual_oracle: f64,
    pub geodesic_residual_solver: f64,
    pub hcma_residual_oracle: f64,
    pub h: f64,
    pub tau: f64,
    /// `linf_distance / (h² + τ²)`
    pub scale_constant: f64,
    pub trusted_fraction: f64,
    pub solver_converged: bool,
    pub solver_start: InitialPath,
}

pub fn run_oracle_compare(r: &Resolved, out: &Path) -> Result<Outcome, CliError> {
    prepare(out)?;
    let oracle = r.oracle()?;
    let cfg = SolverConfig {
        lambda_schedule: vec![0.0],
        ..r.solver.clone()
    };
    // the oracle's own lateral values are the natural pinned data
    let result = if oracle.fully_trusted() && r.phi0.phi() != r.phi1.phi() {
        solve_from_path(oracle.path.clone(), &cfg, InitialPath::Oracle)?
    } else {
        solve(
            &r.phi0,
            &r.phi1,
            r.time,
            &SolverConfig {
                initial_path: InitialPath::Linear,
                ..cfg
            },
        )?
    };
    let mut dist: f64 = 0.0;
    let mut trusted = 0usize;
    let mut total = 0usize;
    for (k, mask) in oracle.trusted.iter().enumerate() {
        let (a, b) = (oracle.path.slice(k).values(), result.path.slice(k).values());
        for (i, &t) in mask.iter().enumerate() {
            total += 1;
            if t {
                trusted += 1;
                dist = dist.max((a[i] - b[i]).abs());
            }
        }
    }
    let h = r.grid.spacing()[0];
    let tau = r.time.tau();
    let tol = r.scenario.oracle.tolerance;
    let report = OracleCompareReport {
        linf_distance: dist,
        tolerance: tol,
        passed: dist <= tol,
        geodesic_residual_oracle: geodesic_residual(&oracle.path).max_linf(),
        geodesic_residual_solver: result.residuals.geodesic.max_linf(),
        hcma_residual_oracle: hcma_residual(&oracle.path).max_linf(),
        h,
        tau,
        scale_constant: dist / (h * h + tau * tau),
        trusted_fraction: trusted as f64 / total as f64,
        solver_converged: result.converged,
        solver_start: result.initial_path,
    };
    let file = out.join("oracle_compare.json");
    write_json(&file, &report)?;
    Ok(Outcome {
        exit_code: if report.passed { 0 } else { 1 },
        summary: format!(
            "oracle-compare {}: linf distance {dist:e} (tolerance {tol:e})",
            if report.passed { "passed" } else { "FAILED" }
        ),
        files: vec![file],
    })
}
