//! Discrete paths of toric potentials.

use crate::error::{Error, Result};
use crate::grid::{self, Grid, ScalarField, TimeAxis};
use crate::ma::{min_hessian_eigenvalue, ToricBackground, ToricPotential};

/// Slices `φ_0 … φ_M` of perturbations of one background.
///
/// Only the core nodes (two or more layers from the boundary) of the inner
/// slices are free. The two outer node layers are pinned data; for
/// [`PotentialPath::linear`] they hold `(1 − t)·φ_0 + t·φ_M`, other
/// constructors may prescribe them.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialPath {
    background: ToricBackground,
    time: TimeAxis,
    slices: Vec<ScalarField>,
}

impl PotentialPath {
    pub fn linear(phi0: &ToricPotential, phi1: &ToricPotential, time: TimeAxis) -> Result<Self> {
        if phi0.background() != phi1.background() {
            return Err(Error::Argument(
                "endpoints use different backgrounds".into(),
            ));
        }
        let (a, b) = (phi0.phi().values(), phi1.phi().values());
        let grid = phi0.phi().grid().clone();
        let mut slices = Vec::with_capacity(time.steps() + 1);
        slices.push(phi0.phi().clone());
        for k in 1..time.steps() {
            let t = time.knot(k);
            let v = a
                .iter()
                .zip(b)
                .map(|(x, y)| (1.0 - t) * x + t * y)
                .collect();
            slices.push(ScalarField::from_raw(grid.clone(), v));
        }
        slices.push(phi1.phi().clone());
        Self::from_slices(phi0.background(), time, slices)
    }

    /// Path with every slice equal to `phi`.
    pub fn constant(phi: &ToricPotential, time: TimeAxis) -> Self {
        Self {
            background: phi.background().clone(),
            time,
            slices: vec![phi.phi().clone(); time.steps() + 1],
        }
    }

    /// Checks slice count, grids, and convexity: endpoints on all interior
    /// nodes, inner slices on the core nodes.
    pub fn from_slices(
        background: &ToricBackground,
        time: TimeAxis,
        slices: Vec<ScalarField>,
    ) -> Result<Self> {
        if slices.len() != time.steps() + 1 {
            return Err(Error::Argument(format!(
                "{} slices for {} time steps",
                slices.len(),
                time.steps()
            )));
        }
        let grid = background.grid();
        let interior = grid.interior_nodes();
        let core = grid.core_nodes();
        for (k, s) in slices.iter().enumerate() {
            grid::same_grid(grid, s.grid())?;
            if let Some(i) = s.values().iter().position(|v| !v.is_finite()) {
                return Err(Error::InvalidField(format!(
                    "slice {k} is not finite at node {i}"
                )));
            }
            let nodes = if k == 0 || k == time.steps() {
                &interior
            } else {
                &core
            };
            let (node, min_eig) =
                min_hessian_eigenvalue(grid, &background.total(s.values()), nodes);
            if !(min_eig > 0.0) {
                return Err(Error::NotConvex {
                    what: format!("slice {k}"),
                    node,
                    min_eigenvalue: min_eig,
                });
            }
        }
        Ok(Self {
            background: background.clone(),
            time,
            slices,
        })
    }

    /// No convexity check; used where some nodes are known to be unreliable.
    pub(crate) fn from_slices_unchecked(
        background: &ToricBackground,
        time: TimeAxis,
        slices: Vec<ScalarField>,
    ) -> Self {
        Self {
            background: background.clone(),
            time,
            slices,
        }
    }

    pub fn background(&self) -> &ToricBackground {
        &self.background
    }

    pub fn grid(&self) -> &Grid {
        self.background.grid()
    }

    pub fn time(&self) -> TimeAxis {
        self.time
    }

    pub fn slices(&self) -> &[ScalarField] {
        &self.slices
    }

    pub fn slice(&self, k: usize) -> &ScalarField {
        &self.slices[k]
    }

    /// True when every pinned node holds the linear interpolation of the
    /// endpoint values exactly.
    pub fn has_linear_pinned_data(&self) -> bool {
        let grid = self.grid();
        let (a, b) = (
            self.slices[0].values(),
            self.slices[self.time.steps()].values(),
        );
        (1..self.time.steps()).all(|k| {
            let t = self.time.knot(k);
            let s = self.slices[k].values();
            (0..grid.len())
                .filter(|&i| !grid.is_core(i))
                .all(|i| s[i] == (1.0 - t) * a[i] + t * b[i])
        })
    }

    /// Smallest Hessian eigenvalue of `F₀ + φ_k` over the core nodes of all slices.
    pub fn min_core_eigenvalue(&self) -> f64 {
        let core = self.grid().core_nodes();
        self.slices
            .iter()
            .map(|s| {
                min_hessian_eigenvalue(self.grid(), &self.background.total(s.values()), &core).1
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn layout(&self) -> FreeLayout {
        FreeLayout::new(self.grid(), self.time)
    }

    /// Free values, time-major: knot `k` and core node `c` at `(k−1)·ncore + c`.
    pub fn free_values(&self) -> Vec<f64> {
        let layout = self.layout();
        let mut x = vec![0.0; layout.len()];
        for k in 1..self.time.steps() {
            for (c, &idx) in layout.core.iter().enumerate() {
                x[layout.at(k, c)] = self.slices[k].values()[idx];
            }
        }
        x
    }

    /// Copy of the path with new free values; pinned data and endpoints are kept.
    pub fn with_free_values(&self, x: &[f64]) -> Result<Self> {
        let layout = self.layout();
        if x.len() != layout.len() {
            return Err(Error::Argument(format!(
                "{} free values, path has {}",
                x.len(),
                layout.len()
            )));
        }
        let path = self.with_free_unchecked(&layout, x);
        Self::from_slices(&path.background, path.time, path.slices)
    }

    pub(crate) fn with_free_unchecked(&self, layout: &FreeLayout, x: &[f64]) -> Self {
        let mut out = self.clone();
        for k in 1..self.time.steps() {
            let mut v = out.slices[k].values().to_vec();
            for (c, &idx) in layout.core.iter().enumerate() {
                v[idx] = x[layout.at(k, c)];
            }
            out.slices[k] = ScalarField::from_raw(self.grid().clone(), v);
        }
        out
    }
}

/// Index map between path slices and the flat vector of free values.
#[derive(Debug, Clone)]
pub(crate) struct FreeLayout {
    pub core: Vec<usize>,
    pub knots: usize,
}

impl FreeLayout {
    pub fn new(grid: &Grid, time: TimeAxis) -> Self {
        Self {
            core: grid.core_nodes(),
            knots: time.steps() - 1,
        }
    }

    pub fn len(&self) -> usize {
        self.core.len() * self.knots
    }

    pub fn at(&self, k: usize, c: usize) -> usize {
        (k - 1) * self.core.len() + c
    }
}

/// Central time difference at an inner knot: order 1 gives `(φ_{k+1} − φ_{k−1})/(2τ)`,
/// order 2 gives `(φ_{k+1} − 2φ_k + φ_{k−1})/τ²`.
pub fn time_derivative(path: &PotentialPath, k: usize, order: usize) -> Result<ScalarField> {
    let m = path.time.steps();
    if k == 0 || k >= m {
        return Err(Error::EndpointDerivative {
            index: k,
            last: m - 1,
        });
    }
    let tau = path.time.tau();
    let (p, c, n) = (
        path.slices[k - 1].values(),
        path.slices[k].values(),
        path.slices[k + 1].values(),
    );
    let values = match order {
        1 => p
            .iter()
            .zip(n)
            .map(|(a, b)| (b - a) / (2.0 * tau))
            .collect(),
        2 => p
            .iter()
            .zip(c)
            .zip(n)
            .map(|((a, b), d)| (d - 2.0 * b + a) / (tau * tau))
            .collect(),
        _ => {
            return Err(Error::Argument(format!(
                "time derivative order must be 1 or 2, got {order}"
            )))
        }
    };
    Ok(ScalarField::from_raw(path.grid().clone(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (ToricBackground, Grid) {
        let g = Grid::line(9, -1.0, 1.0).unwrap();
        (
            ToricBackground::new(g.sample(|x| 0.5 * x[0] * x[0])).unwrap(),
            g,
        )
    }

    fn path_from(
        bg: &ToricBackground,
        time: TimeAxis,
        f: impl Fn(f64, f64) -> f64,
    ) -> PotentialPath {
        let slices = (0..=time.steps())
            .map(|k| bg.grid().sample(|x| f(time.knot(k), x[0])))
            .collect();
        PotentialPath::from_slices(bg, time, slices).unwrap()
    }

    #[test]
    fn time_derivative_examples() {
        let (bg, g) = setup();
        let time = TimeAxis::new(4).unwrap();
        let lin = path_from(&bg, time, |t, _| 0.7 * t);
        let sq = path_from(&bg, time, |t, _| t * t);
        for k in 1..4 {
            let d1 = time_derivative(&lin, k, 1).unwrap();
            let d2 = time_derivative(&lin, k, 2).unwrap();
            let q2 = time_derivative(&sq, k, 2).unwrap();
            for i in 0..g.len() {
                assert!((d1.values()[i] - 0.7).abs() < 1e-14);
                assert!(d2.values()[i].abs() < 1e-13);
                assert!((q2.values()[i] - 2.0).abs() < 1e-12);
            }
        }
        assert!(matches!(
            time_derivative(&lin, 0, 1),
            Err(Error::EndpointDerivative { index: 0, last: 3 })
        ));
        assert!(time_derivative(&lin, 4, 2).is_err());
    }

    #[test]
    fn linear_path_pins_boundary() {
        let (bg, g) = setup();
        let p0 = ToricPotential::new(&bg, ScalarField::constant(&g, 0.0)).unwrap();
        let p1 = ToricPotential::new(&bg, g.sample(|x| 0.5 * x[0] * x[0])).unwrap();
        let path = PotentialPath::linear(&p0, &p1, TimeAxis::new(4).unwrap()).unwrap();
        assert!(path.has_linear_pinned_data());
        assert_eq!(path.free_values().len(), 3 * 5);
        let x: Vec<f64> = path.free_values().iter().map(|v| v + 0.01).collect();
        let moved = path.with_free_values(&x).unwrap();
        assert!(moved.has_linear_pinned_data());
        assert_eq!(moved.slice(0), path.slice(0));
        assert_ne!(moved.slice(2), path.slice(2));
    }

    #[test]
    fn rejects_nonconvex_slice() {
        let (bg, _) = setup();
        let time = TimeAxis::new(2).unwrap();
        let slices = vec![
            bg.grid().sample(|_| 0.0),
            bg.grid().sample(|x| -x[0] * x[0]),
            bg.grid().sample(|_| 0.0),
        ];
        assert!(matches!(
            PotentialPath::from_slices(&bg, time, slices),
            Err(Error::NotConvex { .. })
        ));
    }
}
