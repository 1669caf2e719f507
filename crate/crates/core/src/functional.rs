//! Discrete energy, magnetic term and Landau–Hall functional with their
//! exact adjoint gradient.
//!
//! Both terms use the half-knot midpoint rule in time: on `[t_k, t_{k+1}]`
//! the velocity is `v = (φ_{k+1} − φ_k)/τ` and the potential is the average
//! `m = (φ_k + φ_{k+1})/2`. Space integrals use uniform weights on the
//! interior nodes.
//!
//! ```text
//! E = Σ_k τ Σ_x w · ½ v² · n! det Hess(F₀ + m) / V
//! β = Σ_k τ Σ_x w · v · n! det Hess(S) / V,   S = F₀ + v  or  S = v
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{hessian_adjoint_at, hessian_at, ScalarField};
use crate::ma::{factorial, min_hessian_eigenvalue};
use crate::path::{FreeLayout, PotentialPath};

/// How the velocity enters the magnetic term's Monge–Ampère factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityForm {
    /// Hessians of `F₀ + φ̇`.
    #[default]
    Derived,
    /// Hessians of `φ̇` alone.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingConfig {
    pub lambda: f64,
    pub velocity_form: VelocityForm,
}

impl CouplingConfig {
    pub fn new(lambda: f64, velocity_form: VelocityForm) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::Argument(format!(
                "coupling must be finite and non-negative, got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            velocity_form,
        })
    }

    pub fn classical() -> Self {
        Self {
            lambda: 0.0,
            velocity_form: VelocityForm::Derived,
        }
    }
}

struct HalfStep {
    v: Vec<f64>,
    mid: Vec<f64>,
    slot: Vec<f64>,
}

fn half_step(path: &PotentialPath, k: usize, form: VelocityForm) -> HalfStep {
    let tau = path.time().tau();
    let f0 = path.background().f0().values();
    let (a, b) = (path.slice(k).values(), path.slice(k + 1).values());
    let v: Vec<f64> = a.iter().zip(b).map(|(x, y)| (y - x) / tau).collect();
    let mid = f0
        .iter()
        .zip(a.iter().zip(b))
        .map(|(f, (x, y))| f + 0.5 * (x + y))
        .collect();
    let slot = match form {
        VelocityForm::Derived => f0.iter().zip(&v).map(|(f, w)| f + w).collect(),
        VelocityForm::Literal => v.clone(),
    };
    HalfStep { v, mid, slot }
}

/// `(energy, magnetic)` of a path.
fn terms(path: &PotentialPath, form: VelocityForm, with_magnetic: bool) -> (f64, f64) {
    let grid = path.grid();
    let scale =
        path.time().tau() * grid.cell_volume() * factorial(grid.dim()) / path.background().volume();
    let interior = grid.interior_nodes();
    let (mut e, mut beta) = (0.0, 0.0);
    for k in 0..path.time().steps() {
        let hs = half_step(path, k, form);
        for &idx in &interior {
            let v = hs.v[idx];
            e += 0.5 * v * v * hessian_at(grid, &hs.mid, idx).det();
            if with_magnetic {
                beta += v * hessian_at(grid, &hs.slot, idx).det();
            }
        }
    }
    (scale * e, scale * beta)
}

/// Discrete path energy `½∫∫ φ̇² MA(φ)`.
pub fn energy(path: &PotentialPath) -> f64 {
    terms(path, VelocityForm::Derived, false).0
}

/// Discrete `∫∫ φ̇ · MA(slot)` with the slot chosen by `cfg.velocity_form`.
pub fn magnetic_term(path: &PotentialPath, cfg: &CouplingConfig) -> f64 {
    terms(path, cfg.velocity_form, true).1
}

/// `energy + λ · magnetic_term`.
pub fn lh(path: &PotentialPath, cfg: &CouplingConfig) -> f64 {
    if cfg.lambda == 0.0 {
        return energy(path);
    }
    let (e, b) = terms(path, cfg.velocity_form, true);
    e + cfg.lambda * b
}

/// Derivative of [`lh`] with respect to every nodal value of every slice,
/// before pinned values are masked out.
fn raw_gradient(path: &PotentialPath, cfg: &CouplingConfig) -> Vec<Vec<f64>> {
    let grid = path.grid();
    let n = grid.len();
    let tau = path.time().tau();
    let c = tau * grid.cell_volume() * factorial(grid.dim()) / path.background().volume();
    let interior = grid.interior_nodes();
    let lam = cfg.lambda;
    let mut out = vec![vec![0.0; n]; path.time().steps() + 1];
    let mut dv = vec![0.0; n];
    let mut dm = vec![0.0; n];
    for k in 0..path.time().steps() {
        dv.iter_mut().for_each(|x| *x = 0.0);
        dm.iter_mut().for_each(|x| *x = 0.0);
        let hs = half_step(path, k, cfg.velocity_form);
        for &idx in &interior {
            let v = hs.v[idx];
            let hm = hessian_at(grid, &hs.mid, idx);
            dv[idx] += c * v * hm.det();
            hessian_adjoint_at(grid, &(0.5 * c * v * v * hm.cofactor()), idx, &mut dm);
            if lam != 0.0 {
                let hsl = hessian_at(grid, &hs.slot, idx);
                dv[idx] += lam * c * hsl.det();
                hessian_adjoint_at(grid, &(lam * c * v * hsl.cofactor()), idx, &mut dv);
            }
        }
        let (lo, hi) = out.split_at_mut(k + 1);
        let (a, b) = (&mut lo[k], &mut hi[0]);
        for i in 0..n {
            a[i] += -dv[i] / tau + 0.5 * dm[i];
            b[i] += dv[i] / tau + 0.5 * dm[i];
        }
    }
    out
}

/// Gradient of [`lh`] with respect to the free values of the path.
///
/// Slice-shaped; endpoint slices and pinned nodes carry exact zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct PathGradient {
    slices: Vec<ScalarField>,
}

impl PathGradient {
    pub fn slices(&self) -> &[ScalarField] {
        &self.slices
    }

    pub fn linf(&self) -> f64 {
        self.slices
            .iter()
            .map(ScalarField::max_abs)
            .fold(0.0, f64::max)
    }

    /// `Σ g·ψ` over all slices and nodes.
    pub fn dot(&self, direction: &[ScalarField]) -> f64 {
        self.slices
            .iter()
            .zip(direction)
            .map(|(g, d)| {
                g.values()
                    .iter()
                    .zip(d.values())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .sum()
    }
}

pub fn lh_gradient(path: &PotentialPath, cfg: &CouplingConfig) -> PathGradient {
    let grid = path.grid();
    let m = path.time().steps();
    let raw = raw_gradient(path, cfg);
    let slices = raw
        .into_iter()
        .enumerate()
        .map(|(k, mut g)| {
            for (i, x) in g.iter_mut().enumerate() {
                if k == 0 || k == m || !grid.is_core(i) {
                    *x = 0.0;
                }
            }
            ScalarField::from_raw(grid.clone(), g)
        })
        .collect();
    PathGradient { slices }
}

/// Gradient as a flat vector in the layout of [`PotentialPath::free_values`].
pub(crate) fn free_gradient(
    path: &PotentialPath,
    cfg: &CouplingConfig,
    layout: &FreeLayout,
) -> Vec<f64> {
    let raw = raw_gradient(path, cfg);
    let mut g = vec![0.0; layout.len()];
    for k in 1..path.time().steps() {
        for (c, &idx) in layout.core.iter().enumerate() {
            g[layout.at(k, c)] = raw[k][idx];
        }
    }
    g
}

/// Half-intervals whose velocity slot `F₀ + v` fails to be strictly convex on
/// the core nodes.
pub fn nonconvex_velocity_intervals(path: &PotentialPath) -> Vec<usize> {
    let core = path.grid().core_nodes();
    (0..path.time().steps())
        .filter(|&k| {
            let hs = half_step(path, k, VelocityForm::Derived);
            !(min_hessian_eigenvalue(path.grid(), &hs.slot, &core).1 > 0.0)
        })
        .collect()
}
