//! Real Monge–Ampère densities, mixed discriminants and cofactor pairings.
//!
//! Wedge products of `dd^c` forms of torus-invariant functions become
//! determinant-type expressions of real Hessians in the log chart:
//!
//! * `dd^c u₁ ∧ … ∧ dd^c uₙ  ↦  n!·md(Hess u₁, …, Hess uₙ)`
//! * `du ∧ d^c v ∧ (slots)^{n−1}  ↦  (n−1)!·∇uᵀ·MixedCof(slots)·∇v`

use crate::error::{Error, Result};
use crate::grid::{
    self, gradient_at, hessian_at, integrate, Grid, HessField, ScalarField, Support,
};
use crate::sym::SymMat;

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Mixed discriminant, normalized so that `md(A, …, A) = det A`.
pub fn md(mats: &[SymMat]) -> Result<f64> {
    let n = mats.len();
    if n == 0 || mats.iter().any(|m| m.dim() != n) {
        return Err(Error::Argument(format!(
            "mixed discriminant of {n} matrices needs {n}x{n} arguments"
        )));
    }
    Ok(md_unchecked(mats))
}

pub(crate) fn md_unchecked(mats: &[SymMat]) -> f64 {
    match mats {
        [a] => a.xx(),
        [a, b] => 0.5 * ((*a + *b).det() - (a.det() + b.det())),
        _ => unreachable!("dimension is 1 or 2"),
    }
}

/// `n!·det(Hess F)` at interior nodes, zero on the boundary layer.
pub fn ma_density(f: &ScalarField) -> ScalarField {
    let grid = f.grid();
    let nf = factorial(grid.dim());
    let mut out = vec![0.0; grid.len()];
    for idx in grid.interior_nodes() {
        out[idx] = nf * hessian_at(grid, f.values(), idx).det();
    }
    ScalarField::from_raw(grid.clone(), out)
}

/// `n!·md(Hess F₁, …, Hess Fₙ)` at interior nodes.
pub fn mixed_ma_density(slots: &[&ScalarField]) -> Result<ScalarField> {
    let first = slots
        .first()
        .ok_or_else(|| Error::Argument("no slots given".into()))?;
    let grid = first.grid();
    let n = grid.dim();
    if slots.len() != n {
        return Err(Error::Argument(format!(
            "{} slots given, dimension {n} needs {n}",
            slots.len()
        )));
    }
    for s in slots {
        grid::same_grid(grid, s.grid())?;
    }
    let nf = factorial(n);
    let mut out = vec![0.0; grid.len()];
    let mut mats = [SymMat::zero(n); 2];
    for idx in grid.interior_nodes() {
        for (m, s) in mats.iter_mut().zip(slots) {
            *m = hessian_at(grid, s.values(), idx);
        }
        out[idx] = nf * md_unchecked(&mats[..n]);
    }
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// Mixed cofactor of `n − 1` slot matrices: `[1]` for n = 1, `Cof(A)` for n = 2.
pub(crate) fn mixed_cofactor(dim: usize, slots: &[SymMat]) -> SymMat {
    match dim {
        1 => SymMat::scalar(1.0),
        _ => slots[0].cofactor(),
    }
}

/// `(n−1)!·∇uᵀ·MixedCof(Hess W…)·∇v` at interior nodes.
pub fn cofactor_pairing(
    u: &ScalarField,
    v: &ScalarField,
    slots: &[&ScalarField],
) -> Result<ScalarField> {
    let grid = u.grid();
    let n = grid.dim();
    grid::same_grid(grid, v.grid())?;
    if slots.len() != n - 1 {
        return Err(Error::Argument(format!(
            "{} slots given, cofactor pairing in dimension {n} needs {}",
            slots.len(),
            n - 1
        )));
    }
    for s in slots {
        grid::same_grid(grid, s.grid())?;
    }
    let c = factorial(n - 1);
    let mut out = vec![0.0; grid.len()];
    let mut mats = [SymMat::zero(n); 1];
    for idx in grid.interior_nodes() {
        for (m, s) in mats.iter_mut().zip(slots) {
            *m = hessian_at(grid, s.values(), idx);
        }
        let cof = mixed_cofactor(n, &mats[..n - 1]);
        let gu = gradient_at(grid, u.values(), idx);
        let gv = gradient_at(grid, v.values(), idx);
        out[idx] = c * cof.bilinear(&gu[..n], &gv[..n]);
    }
    Ok(ScalarField::from_raw(grid.clone(), out))
}

/// Smallest Hessian eigenvalue of `f` over `nodes`, with the node attaining it.
pub(crate) fn min_hessian_eigenvalue(grid: &Grid, f: &[f64], nodes: &[usize]) -> (usize, f64) {
    nodes
        .iter()
        .map(|&idx| (idx, hessian_at(grid, f, idx).min_eigenvalue()))
        .fold((usize::MAX, f64::INFINITY), |best, cur| {
            if cur.1 < best.1 {
                cur
            } else {
                best
            }
        })
}

/// The fixed strictly convex function `F₀` together with its total mass `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToricBackground {
    f0: ScalarField,
    hess: HessField,
    volume: f64,
}

impl ToricBackground {
    pub fn new(f0: ScalarField) -> Result<Self> {
        let grid = f0.grid();
        let (node, min_eig) = min_hessian_eigenvalue(grid, f0.values(), &grid.interior_nodes());
        if !(min_eig > 0.0) {
            return Err(Error::NotConvex {
                what: "background".into(),
                node,
                min_eigenvalue: min_eig,
            });
        }
        let volume = integrate(&ma_density(&f0), Support::Interior);
        if !(volume > 0.0 && volume.is_finite()) {
            return Err(Error::InvalidField(format!(
                "background mass {volume} is not positive"
            )));
        }
        let hess = grid::hessian_fd(&f0);
        Ok(Self { f0, hess, volume })
    }

    pub fn grid(&self) -> &Grid {
        self.f0.grid()
    }

    pub fn f0(&self) -> &ScalarField {
        &self.f0
    }

    pub fn hessian(&self) -> &HessField {
        &self.hess
    }

    /// Total Monge–Ampère mass of `F₀` over the interior nodes.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    /// `F₀ + φ` as raw nodal values.
    pub(crate) fn total(&self, phi: &[f64]) -> Vec<f64> {
        self.f0
            .values()
            .iter()
            .zip(phi)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// A point of the toric potential space: `F = F₀ + φ` strictly convex.
#[derive(Debug, Clone, PartialEq)]
pub struct ToricPotential {
    background: ToricBackground,
    phi: ScalarField,
}

impl ToricPotential {
    pub fn new(background: &ToricBackground, phi: ScalarField) -> Result<Self> {
        let grid = background.grid();
        grid::same_grid(grid, phi.grid())?;
        let f = background.total(phi.values());
        let (node, min_eig) = min_hessian_eigenvalue(grid, &f, &grid.interior_nodes());
        if !(min_eig > 0.0) {
            return Err(Error::NotConvex {
                what: "potential".into(),
                node,
                min_eigenvalue: min_eig,
            });
        }
        Ok(Self {
            background: background.clone(),
            phi,
        })
    }

    pub fn background(&self) -> &ToricBackground {
        &self.background
    }

    pub fn phi(&self) -> &ScalarField {
        &self.phi
    }

    pub fn total(&self) -> ScalarField {
        ScalarField::from_raw(
            self.phi.grid().clone(),
            self.background.total(self.phi.values()),
        )
    }

    /// Smallest Hessian eigenvalue of `F₀ + φ` over the interior nodes.
    pub fn min_eigenvalue(&self) -> f64 {
        let grid = self.phi.grid();
        min_hessian_eigenvalue(grid, self.total().values(), &grid.interior_nodes()).1
    }
}
