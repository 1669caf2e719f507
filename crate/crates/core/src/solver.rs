//! Fixed-endpoint critical paths of the discrete Landau–Hall functional.
//!
//! For each coupling in the schedule the free values are driven to a zero of
//! the gradient, warm-starting from the previous stage. The default method
//! is Newton's method on the gradient, with the Jacobian assembled from
//! differences of the exact gradient (a coloring of the free unknowns picks
//! out all columns with a few dozen gradient evaluations) and globalized by
//! backtracking on `½‖g‖²`. At positive coupling the critical paths are
//! typically not minima of the functional, which rules out descent on `lh`
//! itself; plain Armijo gradient descent remains available.
//!
//! Every accepted iterate keeps the Hessian of `F₀ + φ_k` above the
//! convexity margin at all core nodes.

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::functional::{
    free_gradient, lh, nonconvex_velocity_intervals, CouplingConfig, VelocityForm,
};
use crate::grid::{Grid, TimeAxis};
use crate::ma::ToricPotential;
use crate::oracle::oracle_geodesic;
use crate::path::{FreeLayout, PotentialPath};
use crate::residuals::{
    corollary_residual, geodesic_residual, hcma_residual, magnetic_residual, ResidualReport,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    Newton,
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialPath {
    #[default]
    Linear,
    Oracle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub max_iterations: usize,
    /// Stage stops once the L∞ norm of the free gradient is at most this.
    pub gradient_tolerance: f64,
    /// First trial step of gradient descent; Newton always tries the full step.
    pub initial_step: f64,
    pub backtracking: f64,
    pub armijo: f64,
    pub convexity_margin: f64,
    pub lambda_schedule: Vec<f64>,
    pub velocity_form: VelocityForm,
    pub rng_seed: u64,
    pub method: Method,
    pub initial_path: InitialPath,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            gradient_tolerance: 1e-10,
            initial_step: 1.0,
            backtracking: 0.5,
            armijo: 1e-4,
            convexity_margin: 1e-3,
            lambda_schedule: vec![0.0],
            velocity_form: VelocityForm::Derived,
            rng_seed: 0,
            method: Method::Newton,
            initial_path: InitialPath::Linear,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Argument(m));
        if !(self.gradient_tolerance > 0.0 && self.gradient_tolerance.is_finite()) {
            return bad(format!(
                "gradient_tolerance must be positive, got {}",
                self.gradient_tolerance
            ));
        }
        if !(self.convexity_margin > 0.0 && self.convexity_margin.is_finite()) {
            return bad(format!(
                "convexity_margin must be positive, got {}",
                self.convexity_margin
            ));
        }
        if !(self.backtracking > 0.0 && self.backtracking < 1.0) {
            return bad(format!(
                "backtracking must lie in (0, 1), got {}",
                self.backtracking
            ));
        }
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad(format!("armijo must lie in (0, 1), got {}", self.armijo));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad(format!(
                "initial_step must be positive, got {}",
                self.initial_step
            ));
        }
        match self.lambda_schedule.first() {
            Some(&0.0) => {}
            _ => return bad("lambda_schedule must start at 0".into()),
        }
        if self.lambda_schedule.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("lambda_schedule must be strictly increasing".into());
        }
        if self.lambda_schedule.iter().any(|l| !l.is_finite()) {
            return bad("lambda_schedule entries must be finite".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    pub lambda: f64,
    pub lh: f64,
    pub grad_linf: f64,
    /// Smallest Hessian eigenvalue of `F₀ + φ_k` over all slices' core nodes.
    pub min_eig: f64,
    /// `½‖g‖²`, the quantity Newton's line search decreases.
    pub merit: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageTrace {
    pub lambda: f64,
    pub converged: bool,
    pub records: Vec<TraceRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBundle {
    pub geodesic: ResidualReport,
    /// Dictionary form with `F₀ + φ̇` slots.
    pub magnetic_derived: ResidualReport,
    /// The equation with summed Hessian entries and bare velocity Hessians.
    pub magnetic_literal: ResidualReport,
    pub hcma: ResidualReport,
}

impl ResidualBundle {
    pub fn new(path: &PotentialPath, lambda: f64) -> Self {
        let derived = CouplingConfig {
            lambda,
            velocity_form: VelocityForm::Derived,
        };
        Self {
            geodesic: geodesic_residual(path),
            magnetic_derived: magnetic_residual(path, &derived),
            magnetic_literal: corollary_residual(path, &derived),
            hcma: hcma_residual(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub path: PotentialPath,
    pub converged: bool,
    /// Accepted steps over all stages.
    pub iterations: usize,
    pub final_gradient_linf: f64,
    pub stages: Vec<StageTrace>,
    pub residuals: ResidualBundle,
    /// Half-intervals where `F₀ + φ̇` is not strictly convex on the core nodes.
    pub nonconvex_velocity: Vec<usize>,
    pub initial_path: InitialPath,
}

fn check_margin(what: &str, min_eig: f64, delta: f64) -> Result<()> {
    if min_eig >= delta {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} has minimum Hessian eigenvalue {min_eig:e}, below the convexity margin {delta:e}"
        )))
    }
}

/// Oracle start from discrete endpoints: the dual box is the common slope
/// range of both endpoints, shrunk by one cell. `None` when that range is
/// empty or some working node is not covered.
fn discrete_oracle(
    phi0: &ToricPotential,
    phi1: &ToricPotential,
    time: TimeAxis,
) -> Option<PotentialPath> {
    let grid = phi0.phi().grid();
    let dim = grid.dim();
    let mut points = Vec::new();
    let mut bounds = Vec::new();
    for axis in 0..dim {
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for p in [phi0, phi1] {
            let g = crate::grid::gradient_fd(&p.total());
            let (mut a, mut b) = (f64::INFINITY, f64::NEG_INFINITY);
            for idx in grid.interior_nodes() {
                let s = g.get(idx)?[axis];
                a = a.min(s);
                b = b.max(s);
            }
            lo = lo.max(a);
            hi = hi.min(b);
        }
        let h = grid.spacing()[axis];
        let (lo, hi) = (lo + h, hi - h);
        if !(hi > lo) {
            return None;
        }
        points.push((((hi - lo) / h).ceil() as usize + 1).max(5));
        bounds.push((lo, hi));
    }
    let dual = Grid::new(&points, &bounds).ok()?;
    let oracle = oracle_geodesic(phi0, phi1, time, &dual).ok()?;
    oracle.fully_trusted().then_some(oracle.path)
}

/// Solve between two endpoints. Equal endpoints return the constant path.
pub fn solve(
    phi0: &ToricPotential,
    phi1: &ToricPotential,
    time: TimeAxis,
    cfg: &SolverConfig,
) -> Result<SolveResult> {
    cfg.validate()?;
    check_margin(
        "start potential",
        phi0.min_eigenvalue(),
        cfg.convexity_margin,
    )?;
    check_margin("end potential", phi1.min_eigenvalue(), cfg.convexity_margin)?;
    if phi0.phi() == phi1.phi() && phi0.background() == phi1.background() {
        return solve_inner(
            PotentialPath::constant(phi0, time),
            cfg,
            InitialPath::Linear,
            true,
        );
    }
    let (start, used) = match cfg.initial_path {
        InitialPath::Oracle => match discrete_oracle(phi0, phi1, time) {
            Some(p) => (p, InitialPath::Oracle),
            None => (
                PotentialPath::linear(phi0, phi1, time)?,
                InitialPath::Linear,
            ),
        },
        InitialPath::Linear => (
            PotentialPath::linear(phi0, phi1, time)?,
            InitialPath::Linear,
        ),
    };
    solve_inner(start, cfg, used, false)
}

/// Solve starting from a given path, whose endpoints and pinned values are kept.
pub fn solve_from_path(
    initial: PotentialPath,
    cfg: &SolverConfig,
    label: InitialPath,
) -> Result<SolveResult> {
    cfg.validate()?;
    solve_inner(initial, cfg, label, false)
}

fn solve_inner(
    initial: PotentialPath,
    cfg: &SolverConfig,
    label: InitialPath,
    stationary: bool,
) -> Result<SolveResult> {
    let m = initial.time().steps();
    let grid = initial.grid().clone();
    let interior = grid.interior_nodes();
    for k in [0, m] {
        let f = initial.background().total(initial.slice(k).values());
        let min = crate::ma::min_hessian_eigenvalue(&grid, &f, &interior).1;
        check_margin(
            if k == 0 {
                "start potential"
            } else {
                "end potential"
            },
            min,
            cfg.convexity_margin,
        )?;
    }
    check_margin(
        "initial path",
        initial.min_core_eigenvalue(),
        cfg.convexity_margin,
    )?;

    let layout = FreeLayout::new(&grid, initial.time());
    let mut path = initial;
    let mut stages = Vec::with_capacity(cfg.lambda_schedule.len());
    let mut iterations = 0;
    let mut last_g = 0.0;
    for &lambda in &cfg.lambda_schedule {
        let coupling = CouplingConfig::new(lambda, cfg.velocity_form)?;
        let mut stage = Stage {
            cfg,
            coupling,
            layout: &layout,
            grid: &grid,
        };
        let (p, trace, its) = if stationary {
            stage.record_only(path)
        } else {
            match cfg.method {
                Method::Newton => stage.newton(path)?,
                Method::GradientDescent => stage.descent(path),
            }
        };
        path = p;
        iterations += its;
        last_g = trace.records.last().map_or(0.0, |r| r.grad_linf);
        stages.push(trace);
    }
    let converged = stages.iter().all(|s| s.converged);
    let lambda = *cfg.lambda_schedule.last().unwrap_or(&0.0);
    Ok(SolveResult {
        residuals: ResidualBundle::new(&path, lambda),
        nonconvex_velocity: nonconvex_velocity_intervals(&path),
        path,
        converged,
        iterations,
        final_gradient_linf: last_g,
        stages,
        initial_path: label,
    })
}

fn linf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn half_norm2(v: &[f64]) -> f64 {
    0.5 * v.iter().map(|x| x * x).sum::<f64>()
}

struct Stage<'a> {
    cfg: &'a SolverConfig,
    coupling: CouplingConfig,
    layout: &'a FreeLayout,
    grid: &'a Grid,
}

impl Stage<'_> {
    fn gradient(&self, base: &PotentialPath, x: &[f64]) -> Vec<f64> {
        free_gradient(
            &base.with_free_unchecked(self.layout, x),
            &self.coupling,
            self.layout,
        )
    }

    fn record(&self, iteration: usize, path: &PotentialPath, g: &[f64]) -> TraceRecord {
        TraceRecord {
            iteration,
            lambda: self.coupling.lambda,
            lh: lh(path, &self.coupling),
            grad_linf: linf(g),
            min_eig: path.min_core_eigenvalue(),
            merit: half_norm2(g),
        }
    }

    fn record_only(&mut self, path: PotentialPath) -> (PotentialPath, StageTrace, usize) {
        let g = free_gradient(&path, &self.coupling, self.layout);
        let rec = self.record(0, &path, &g);
        let trace = StageTrace {
            lambda: self.coupling.lambda,
            converged: rec.grad_linf <= self.cfg.gradient_tolerance,
            records: vec![rec],
        };
        (path, trace, 0)
    }

    /// Finite-difference Jacobian of the free gradient, one gradient pair per color.
    fn jacobian(&self, base: &PotentialPath, x: &[f64]) -> BandMatrix {
        let dim = self.grid.dim();
        let pts = self.grid.points();
        let nx = pts[0] - 4;
        let ny = if dim == 2 { pts[1] - 4 } else { 1 };
        let nc = self.layout.core.len();
        let band = nc + if dim == 2 { 2 * nx + 2 } else { 2 };
        let n = self.layout.len();
        let mut jac = BandMatrix::zeros(n, band, band);
        let knots = self.layout.knots;
        let eps = 1e-4 * linf(x).max(1.0);
        let colors_y = if dim == 2 { 5 } else { 1 };
        for ck in 0..3 {
            for cx in 0..5 {
                for cy in 0..colors_y {
                    let mut cols = Vec::new();
                    for k in (1 + ck..=knots).step_by(3) {
                        for j in (cy..ny).step_by(5) {
                            for i in (cx..nx).step_by(5) {
                                cols.push((k, i, j));
                            }
                        }
                    }
                    if cols.is_empty() {
                        continue;
                    }
                    let mut xp = x.to_vec();
                    let mut xm = x.to_vec();
                    for &(k, i, j) in &cols {
                        let c = self.layout.at(k, i + nx * j);
                        xp[c] += eps;
                        xm[c] -= eps;
                    }
                    let gp = self.gradient(base, &xp);
                    let gm = self.gradient(base, &xm);
                    for &(k, i, j) in &cols {
                        let col = self.layout.at(k, i + nx * j);
                        for kk in k.saturating_sub(1).max(1)..=(k + 1).min(knots) {
                            for jj in j.saturating_sub(2)..=(j + 2).min(ny - 1) {
                                for ii in i.saturating_sub(2)..=(i + 2).min(nx - 1) {
                                    let row = self.layout.at(kk, ii + nx * jj);
                                    jac.set(row, col, (gp[row] - gm[row]) / (2.0 * eps));
                                }
                            }
                        }
                    }
                }
            }
        }
        jac
    }

    fn newton(&mut self, start: PotentialPath) -> Result<(PotentialPath, StageTrace, usize)> {
        let cfg = self.cfg;
        let mut x = start.free_values();
        let mut path = start;
        let mut g = free_gradient(&path, &self.coupling, self.layout);
        let mut records = vec![self.record(0, &path, &g)];
        let mut accepted = 0;
        while linf(&g) > cfg.gradient_tolerance && accepted < cfg.max_iterations {
            let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
            self.jacobian(&path, &x).factor()?.solve(&mut d);
            let merit = half_norm2(&g);
            let mut alpha = 1.0;
            let mut next = None;
            for _ in 0..60 {
                let xn: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
                let pn = path.with_free_unchecked(self.layout, &xn);
                if pn.min_core_eigenvalue() >= cfg.convexity_margin {
                    let gn = free_gradient(&pn, &self.coupling, self.layout);
                    if half_norm2(&gn) <= (1.0 - 2.0 * cfg.armijo * alpha) * merit {
                        next = Some((xn, pn, gn));
                        break;
                    }
                }
                alpha *= cfg.backtracking;
            }
            let Some((xn, pn, gn)) = next else { break };
            x = xn;
            path = pn;
            g = gn;
            accepted += 1;
            records.push(self.record(accepted, &path, &g));
        }
        let trace = StageTrace {
            lambda: self.coupling.lambda,
            converged: linf(&g) <= cfg.gradient_tolerance,
            records,
        };
        Ok((path, trace, accepted))
    }

    fn descent(&mut self, start: PotentialPath) -> (PotentialPath, StageTrace, usize) {
        let cfg = self.cfg;
        let mut x = start.free_values();
        let mut path = start;
        let mut g = free_gradient(&path, &self.coupling, self.layout);
        let mut value = lh(&path, &self.coupling);
        let mut records = vec![self.record(0, &path, &g)];
        let mut accepted = 0;
        while linf(&g) > cfg.gradient_tolerance && accepted < cfg.max_iterations {
            let gg: f64 = g.iter().map(|v| v * v).sum();
            let mut alpha = cfg.initial_step;
            let mut next = None;
            for _ in 0..60 {
                let xn: Vec<f64> = x.iter().zip(&g).map(|(a, b)| a - alpha * b).collect();
                let pn = path.with_free_unchecked(self.layout, &xn);
                if pn.min_core_eigenvalue() >= cfg.convexity_margin {
                    let vn = lh(&pn, &self.coupling);
                    if vn <= value - cfg.armijo * alpha * gg {
                        next = Some((xn, pn, vn));
                        break;
                    }
                }
                alpha *= cfg.backtracking;
            }
            let Some((xn, pn, vn)) = next else { break };
            x = xn;
            path = pn;
            value = vn;
            g = free_gradient(&path, &self.coupling, self.layout);
            accepted += 1;
            records.push(self.record(accepted, &path, &g));
        }
        let trace = StageTrace {
            lambda: self.coupling.lambda,
            converged: linf(&g) <= cfg.gradient_tolerance,
            records,
        };
        (path, trace, accepted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ma::ToricBackground;
    use crate::presets::Profile;

    fn endpoints(n: usize) -> (ToricPotential, ToricPotential) {
        let grid = Grid::line(n, -0.5, 0.5).unwrap();
        let bg = ToricBackground::new(Profile::standard_background().sample(&grid)).unwrap();
        let p0 = ToricPotential::new(&bg, Profile::Zero.sample(&grid)).unwrap();
        let p1 =
            ToricPotential::new(&bg, Profile::Quadratic { amplitude: 1.0 }.sample(&grid)).unwrap();
        (p0, p1)
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            SolverConfig {
                gradient_tolerance: 0.0,
                ..ok.clone()
            },
            SolverConfig {
                convexity_margin: -1.0,
                ..ok.clone()
            },
            SolverConfig {
                lambda_schedule: vec![0.5, 1.0],
                ..ok.clone()
            },
            SolverConfig {
                lambda_schedule: vec![0.0, 1.0, 0.5],
                ..ok.clone()
            },
            SolverConfig {
                backtracking: 1.0,
                ..ok.clone()
            },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    #[test]
    fn equal_endpoints_short_circuit() {
        let (p0, _) = endpoints(17);
        let cfg = SolverConfig {
            lambda_schedule: vec![0.0, 1.0],
            ..SolverConfig::default()
        };
        let r = solve(&p0, &p0, TimeAxis::new(4).unwrap(), &cfg).unwrap();
        assert!(r.converged);
        assert_eq!(r.iterations, 0);
        for s in &r.stages {
            assert_eq!(s.records.len(), 1);
        }
        assert_eq!(r.path.slice(2), p0.phi());
    }

    #[test]
    fn margin_violation_is_a_precondition_error() {
        let (p0, p1) = endpoints(17);
        let cfg = SolverConfig {
            convexity_margin: 5.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            solve(&p0, &p1, TimeAxis::new(4).unwrap(), &cfg),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn newton_continuation_keeps_endpoints_and_margin() {
        let (p0, p1) = endpoints(17);
        let time = TimeAxis::new(8).unwrap();
        let oracle = crate::oracle::oracle_geodesic_extended(
            &Profile::standard_background(),
            &Profile::Zero,
            &Profile::Quadratic { amplitude: 1.0 },
            p0.phi().grid(),
            time,
        )
        .unwrap();
        let cfg = SolverConfig {
            lambda_schedule: vec![0.0, 0.5],
            gradient_tolerance: 1e-11,
            ..SolverConfig::default()
        };
        let r = solve_from_path(oracle.path.clone(), &cfg, InitialPath::Oracle).unwrap();
        assert!(
            r.converged,
            "{:?}",
            r.stages
                .iter()
                .map(|s| s.records.last().unwrap().grad_linf)
                .collect::<Vec<_>>()
        );
        assert_eq!(r.path.slice(0), p0.phi());
        assert_eq!(r.path.slice(8), p1.phi());
        for s in &r.stages {
            for w in s.records.windows(2) {
                assert!(w[1].merit <= w[0].merit);
            }
            for rec in &s.records {
                assert!(rec.min_eig >= cfg.convexity_margin);
            }
        }
    }

    #[test]
    fn gradient_descent_is_monotone() {
        let (p0, p1) = endpoints(13);
        let cfg = SolverConfig {
            method: Method::GradientDescent,
            max_iterations: 25,
            initial_step: 10.0,
            ..SolverConfig::default()
        };
        let r = solve(&p0, &p1, TimeAxis::new(4).unwrap(), &cfg).unwrap();
        let recs = &r.stages[0].records;
        assert!(recs.len() > 2);
        for w in recs.windows(2) {
            assert!(w[1].lh <= w[0].lh);
        }
        assert!(recs.last().unwrap().grad_linf < recs[0].grad_linf);
    }
}
