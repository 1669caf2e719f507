//! Pointwise residuals of the continuous path equations.
//!
//! All residuals are evaluated at inner knots with central time differences
//! and reported on the core nodes; the pinned layers carry zeros. A residual
//! is always "left side minus right side".

use crate::functional::{CouplingConfig, VelocityForm};
use crate::grid::{gradient_at, hessian_at, Grid, ScalarField, TimeAxis};
use crate::ma::{factorial, md_unchecked, mixed_cofactor};
use crate::path::PotentialPath;
use crate::sym::SymMat;

#[derive(Debug, Clone, PartialEq)]
pub struct KnotResidual {
    pub knot: usize,
    pub field: ScalarField,
    /// `(Σ_core ∏h · r²)^{1/2}`
    pub l2: f64,
    pub linf: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    grid: Grid,
    time: TimeAxis,
    knots: Vec<KnotResidual>,
}

impl ResidualReport {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn time(&self) -> TimeAxis {
        self.time
    }

    /// One entry per inner knot `1..M−1`.
    pub fn knots(&self) -> &[KnotResidual] {
        &self.knots
    }

    pub fn max_l2(&self) -> f64 {
        self.knots.iter().map(|k| k.l2).fold(0.0, f64::max)
    }

    pub fn max_linf(&self) -> f64 {
        self.knots.iter().map(|k| k.linf).fold(0.0, f64::max)
    }
}

/// Per-node quantities at one inner knot.
struct KnotData<'a> {
    grid: &'a Grid,
    total: Vec<f64>,
    vel: Vec<f64>,
    acc: Vec<f64>,
    vel_slot: Vec<f64>,
}

impl<'a> KnotData<'a> {
    fn new(path: &'a PotentialPath, k: usize, form: VelocityForm) -> Self {
        let tau = path.time().tau();
        let f0 = path.background().f0().values();
        let (p, c, n) = (
            path.slice(k - 1).values(),
            path.slice(k).values(),
            path.slice(k + 1).values(),
        );
        let vel: Vec<f64> = p
            .iter()
            .zip(n)
            .map(|(a, b)| (b - a) / (2.0 * tau))
            .collect();
        let acc = p
            .iter()
            .zip(c)
            .zip(n)
            .map(|((a, b), d)| (d - 2.0 * b + a) / (tau * tau))
            .collect();
        let total = f0.iter().zip(c).map(|(f, x)| f + x).collect();
        let vel_slot = match form {
            VelocityForm::Derived => f0.iter().zip(&vel).map(|(f, v)| f + v).collect(),
            VelocityForm::Literal => vel.clone(),
        };
        Self {
            grid: path.grid(),
            total,
            vel,
            acc,
            vel_slot,
        }
    }

    fn hess(&self, idx: usize) -> SymMat {
        hessian_at(self.grid, &self.total, idx)
    }
}

fn build(
    path: &PotentialPath,
    form: VelocityForm,
    eval: impl Fn(&KnotData, usize) -> f64,
) -> ResidualReport {
    let grid = path.grid();
    let core = grid.core_nodes();
    let cell = grid.cell_volume();
    let knots = (1..path.time().steps())
        .map(|k| {
            let data = KnotData::new(path, k, form);
            let mut r = vec![0.0; grid.len()];
            for &idx in &core {
                r[idx] = eval(&data, idx);
            }
            let l2 = (cell * r.iter().map(|x| x * x).sum::<f64>()).sqrt();
            let linf = r.iter().fold(0.0, |m: f64, x| m.max(x.abs()));
            KnotResidual {
                knot: k,
                field: ScalarField::from_raw(grid.clone(), r),
                l2,
                linf,
            }
        })
        .collect();
    ResidualReport {
        grid: grid.clone(),
        time: path.time(),
        knots,
    }
}

/// `φ̈·MA(φ) − (n/V)·dφ̇∧d^cφ̇∧ω_φ^{n−1}` in toric form.
fn geodesic_part(d: &KnotData, idx: usize, volume: f64) -> f64 {
    let n = d.grid.dim();
    let h = d.hess(idx);
    let g = gradient_at(d.grid, &d.vel, idx);
    let pairing = factorial(n - 1) * mixed_cofactor(n, &[h]).bilinear(&g[..n], &g[..n]);
    d.acc[idx] * factorial(n) * h.det() / volume - n as f64 / volume * pairing
}

pub fn geodesic_residual(path: &PotentialPath) -> ResidualReport {
    let v = path.background().volume();
    build(path, VelocityForm::Derived, |d, idx| {
        geodesic_part(d, idx, v)
    })
}

/// Geodesic residual plus the two λ-weighted terms coming from the magnetic
/// functional:
///
/// ```text
/// + λ (2n/V)     · n! md(Hess φ̈, S^{n−1})
/// + λ (n(n−1)/V) · n! md(Hess φ̇, Hess φ̈, S^{n−2})
/// ```
///
/// with `S = Hess(F₀ + φ̇)` (derived) or `Hess φ̇` (literal).
pub fn magnetic_residual(path: &PotentialPath, cfg: &CouplingConfig) -> ResidualReport {
    let vol = path.background().volume();
    let lam = cfg.lambda;
    build(path, cfg.velocity_form, |d, idx| {
        let n = d.grid.dim();
        let nf = factorial(n);
        let ha = hessian_at(d.grid, &d.acc, idx);
        let hs = hessian_at(d.grid, &d.vel_slot, idx);
        let mut magnetic = match n {
            1 => 2.0 / vol * nf * ha.xx(),
            _ => 2.0 * n as f64 / vol * nf * md_unchecked(&[ha, hs]),
        };
        if n == 2 {
            let hv = hessian_at(d.grid, &d.vel, idx);
            magnetic += 2.0 / vol * nf * md_unchecked(&[hv, ha]);
        }
        geodesic_part(d, idx, vol) + lam * magnetic
    })
}

/// The toric equation with every bracket read as the plain sum of entries:
///
/// ```text
/// F̈·n! det Hess F − (n/V)(Σᵢⱼ ∂ᵢḞ ∂ⱼḞ)(Σ Hess F)^{n−1}
///     + λ (2n/V)(Σ Hess F̈)(Σ Hess Ḟ)^{n−1}
///     + λ (n(n−1)/V)(Σ Hess Ḟ)(Σ Hess F̈)(Σ Hess Ḟ)^{n−2}
/// ```
///
/// Velocity Hessians are those of `φ̇` alone and the left side is not divided by `V`.
pub fn corollary_residual(path: &PotentialPath, cfg: &CouplingConfig) -> ResidualReport {
    let vol = path.background().volume();
    let lam = cfg.lambda;
    build(path, VelocityForm::Literal, |d, idx| {
        let n = d.grid.dim();
        let nf = n as f64;
        let h = d.hess(idx);
        let g = gradient_at(d.grid, &d.vel, idx);
        let gsum: f64 = g[..n].iter().sum();
        let sh = h.entry_sum();
        let sv = hessian_at(d.grid, &d.vel, idx).entry_sum();
        let sa = hessian_at(d.grid, &d.acc, idx).entry_sum();
        let pw = |x: f64, p: usize| x.powi(p as i32);
        let lhs = d.acc[idx] * factorial(n) * h.det();
        let mut rhs = nf / vol * gsum * gsum * pw(sh, n - 1);
        rhs -= lam * 2.0 * nf / vol * sa * pw(sv, n - 1);
        if n >= 2 {
            rhs -= lam * nf * (nf - 1.0) / vol * sv * sa * pw(sv, n - 2);
        }
        lhs - rhs
    })
}

/// Determinant of the space-time Hessian of `F₀ + φ_t` in `(x, t)`,
/// divided by `1 + |det Hess_x F|`.
pub fn hcma_residual(path: &PotentialPath) -> ResidualReport {
    build(path, VelocityForm::Derived, |d, idx| {
        let n = d.grid.dim();
        let h = d.hess(idx);
        let g = gradient_at(d.grid, &d.vel, idx);
        let det = d.acc[idx] * h.det() - h.cofactor().bilinear(&g[..n], &g[..n]);
        det / (1.0 + h.det().abs())
    })
}

/// `∫ φ̇² n! det Hess(F₀ + φ) / V` over the interior nodes at each inner knot.
pub fn energy_profile(path: &PotentialPath) -> Vec<f64> {
    let grid = path.grid();
    let scale = grid.cell_volume() * factorial(grid.dim()) / path.background().volume();
    let interior = grid.interior_nodes();
    (1..path.time().steps())
        .map(|k| {
            let d = KnotData::new(path, k, VelocityForm::Derived);
            scale
                * interior
                    .iter()
                    .map(|&idx| d.vel[idx] * d.vel[idx] * d.hess(idx).det())
                    .sum::<f64>()
        })
        .collect()
}
