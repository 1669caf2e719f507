//! Uniform tensor-product grids, nodal fields and second-order finite differences.
//!
//! Nodes are numbered with the x index running fastest. The outermost node
//! layer is the *boundary*; everything else is *interior*. Nodes at least two
//! layers deep form the *core*: these carry the free degrees of freedom of a
//! path, while the two outer layers are pinned ghost data for the stencils.

use crate::error::{Error, Result};
use crate::sym::SymMat;

/// Smallest admissible number of nodes per axis.
pub const MIN_POINTS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    points: [usize; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    spacing: [f64; 2],
}

impl Grid {
    pub fn new(points: &[usize], bounds: &[(f64, f64)]) -> Result<Self> {
        let dim = points.len();
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!(
                "dimension must be 1 or 2, got {dim}"
            )));
        }
        if bounds.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{} box intervals given for a {dim}-D grid",
                bounds.len()
            )));
        }
        let mut grid = Grid {
            dim,
            points: [1, 1],
            lo: [0.0; 2],
            hi: [0.0; 2],
            spacing: [1.0; 2],
        };
        for axis in 0..dim {
            let n = points[axis];
            let (a, b) = bounds[axis];
            if n < MIN_POINTS {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} has {n} points, need at least {MIN_POINTS}"
                )));
            }
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} interval [{a}, {b}] is empty or not finite"
                )));
            }
            grid.points[axis] = n;
            grid.lo[axis] = a;
            grid.hi[axis] = b;
            grid.spacing[axis] = (b - a) / (n - 1) as f64;
        }
        Ok(grid)
    }

    pub fn line(points: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(&[points], &[(a, b)])
    }

    pub fn square(points: usize, a: f64, b: f64) -> Result<Self> {
        Self::new(&[points, points], &[(a, b), (a, b)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing[..self.dim]
    }

    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        (self.lo[axis], self.hi[axis])
    }

    pub fn len(&self) -> usize {
        self.points[0] * self.points[1]
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `∏ hᵢ`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().iter().product()
    }

    pub fn index(&self, ij: [usize; 2]) -> usize {
        ij[0] + self.points[0] * ij[1]
    }

    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        [idx % self.points[0], idx / self.points[0]]
    }

    /// Node coordinates; the second entry is zero on a 1-D grid.
    pub fn coord(&self, idx: usize) -> [f64; 2] {
        let ij = self.multi_index(idx);
        let mut x = [0.0; 2];
        for (axis, xi) in x.iter_mut().enumerate().take(self.dim) {
            *xi = self.lo[axis] + ij[axis] as f64 * self.spacing[axis];
        }
        x
    }

    /// Number of layers between the node and the nearest boundary face.
    pub fn depth(&self, idx: usize) -> usize {
        let ij = self.multi_index(idx);
        (0..self.dim)
            .map(|axis| ij[axis].min(self.points[axis] - 1 - ij[axis]))
            .min()
            .unwrap_or(0)
    }

    pub fn is_interior(&self, idx: usize) -> bool {
        self.depth(idx) >= 1
    }

    pub fn is_core(&self, idx: usize) -> bool {
        self.depth(idx) >= 2
    }

    pub fn interior_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_interior(i)).collect()
    }

    pub fn core_nodes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.is_core(i)).collect()
    }

    /// Index offset of a step of +1 along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.points[0]
        }
    }

    /// The same grid grown by `layers` nodes on every side, with identical
    /// spacing so that the original nodes are a subset.
    pub fn extended(&self, layers: usize) -> Grid {
        let mut g = self.clone();
        for axis in 0..self.dim {
            let h = self.spacing[axis];
            g.points[axis] += 2 * layers;
            g.lo[axis] -= layers as f64 * h;
            g.hi[axis] += layers as f64 * h;
        }
        g
    }

    /// Map a node of this grid into a grid produced by [`Grid::extended`].
    pub fn index_in_extended(&self, idx: usize, layers: usize, ext: &Grid) -> usize {
        let ij = self.multi_index(idx);
        let mut e = [0usize; 2];
        for axis in 0..self.dim {
            e[axis] = ij[axis] + layers;
        }
        ext.index(e)
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> ScalarField {
        let values = (0..self.len())
            .map(|i| f(&self.coord(i)[..self.dim]))
            .collect();
        ScalarField {
            grid: self.clone(),
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidField(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidField(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        Self::from_raw(
            self.grid.clone(),
            self.values.iter().map(|&v| f(v)).collect(),
        )
    }

    pub fn zip_with(
        &self,
        other: &ScalarField,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<ScalarField> {
        same_grid(&self.grid, &other.grid)?;
        Ok(Self::from_raw(
            self.grid.clone(),
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        ))
    }

    pub fn add(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &ScalarField) -> Result<ScalarField> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub(crate) fn same_grid(a: &Grid, b: &Grid) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(Error::Argument("fields live on different grids".into()))
    }
}

/// Per-node gradient vectors; only interior nodes carry data.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: Grid,
    data: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, idx: usize) -> Option<&[f64]> {
        self.grid
            .is_interior(idx)
            .then(|| &self.data[idx][..self.grid.dim()])
    }
}

/// Per-node symmetric Hessians; only interior nodes carry data.
#[derive(Debug, Clone, PartialEq)]
pub struct HessField {
    grid: Grid,
    data: Vec<SymMat>,
}

impl HessField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn get(&self, idx: usize) -> Option<SymMat> {
        self.grid.is_interior(idx).then(|| self.data[idx])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeAxis {
    steps: usize,
    tau: f64,
}

impl TimeAxis {
    pub fn new(steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidGrid(format!(
                "time axis needs at least 2 steps, got {steps}"
            )));
        }
        Ok(Self {
            steps,
            tau: 1.0 / steps as f64,
        })
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// `t_k = k/M`; exact at both ends.
    pub fn knot(&self, k: usize) -> f64 {
        k as f64 / self.steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    /// Uniform cell weights on interior nodes; the boundary layer is ghost data.
    Interior,
    /// Tensor-product trapezoid rule on every node.
    Full,
}

/// Central-difference gradient at an interior node.
pub(crate) fn gradient_at(grid: &Grid, f: &[f64], idx: usize) -> [f64; 2] {
    let mut g = [0.0; 2];
    for (axis, ga) in g.iter_mut().enumerate().take(grid.dim()) {
        let s = grid.stride(axis);
        *ga = (f[idx + s] - f[idx - s]) / (2.0 * grid.spacing[axis]);
    }
    g
}

/// Second differences at an interior node: 3-point diagonal, 4-point cross.
pub(crate) fn hessian_at(grid: &Grid, f: &[f64], idx: usize) -> SymMat {
    let hx = grid.spacing[0];
    let dxx = (f[idx + 1] - 2.0 * f[idx] + f[idx - 1]) / (hx * hx);
    if grid.dim() == 1 {
        return SymMat::scalar(dxx);
    }
    let hy = grid.spacing[1];
    let sy = grid.points[0];
    let dyy = (f[idx + sy] - 2.0 * f[idx] + f[idx - sy]) / (hy * hy);
    let dxy =
        (f[idx + sy + 1] - f[idx + sy - 1] - f[idx - sy + 1] + f[idx - sy - 1]) / (4.0 * hx * hy);
    SymMat::new2(dxx, dxy, dyy)
}

/// Accumulate `Hᵀ G` at one interior node: `out` receives the derivative of
/// `⟨G, hessian_at(f, idx)⟩` with respect to every nodal value of `f`.
pub(crate) fn hessian_adjoint_at(grid: &Grid, g: &SymMat, idx: usize, out: &mut [f64]) {
    let hx = grid.spacing[0];
    let cx = g.xx() / (hx * hx);
    out[idx + 1] += cx;
    out[idx] -= 2.0 * cx;
    out[idx - 1] += cx;
    if grid.dim() == 1 {
        return;
    }
    let hy = grid.spacing[1];
    let sy = grid.points[0];
    let cy = g.yy() / (hy * hy);
    out[idx + sy] += cy;
    out[idx] -= 2.0 * cy;
    out[idx - sy] += cy;
    // off-diagonal appears twice in the Frobenius pairing
    let cxy = 2.0 * g.xy() / (4.0 * hx * hy);
    out[idx + sy + 1] += cxy;
    out[idx + sy - 1] -= cxy;
    out[idx - sy + 1] -= cxy;
    out[idx - sy - 1] += cxy;
}

pub fn gradient_fd(f: &ScalarField) -> VectorField {
    let grid = f.grid();
    let mut data = vec![[0.0; 2]; grid.len()];
    for idx in grid.interior_nodes() {
        data[idx] = gradient_at(grid, f.values(), idx);
    }
    VectorField {
        grid: grid.clone(),
        data,
    }
}

pub fn hessian_fd(f: &ScalarField) -> HessField {
    let grid = f.grid();
    let mut data = vec![SymMat::zero(grid.dim()); grid.len()];
    for idx in grid.interior_nodes() {
        data[idx] = hessian_at(grid, f.values(), idx);
    }
    HessField {
        grid: grid.clone(),
        data,
    }
}

/// Transpose of [`hessian_fd`]: for a matrix field `g` on interior nodes,
/// returns the nodal field `d/df Σᵢ ⟨gᵢ, Hess_h(f)ᵢ⟩`.
pub fn hessian_fd_adjoint(grid: &Grid, g: &[SymMat]) -> Result<Vec<f64>> {
    if g.len() != grid.len() {
        return Err(Error::Argument(format!(
            "{} matrices for a grid of {} nodes",
            g.len(),
            grid.len()
        )));
    }
    let mut out = vec![0.0; grid.len()];
    for idx in grid.interior_nodes() {
        hessian_adjoint_at(grid, &g[idx], idx, &mut out);
    }
    Ok(out)
}

/// Quadrature weight of node `idx` under `support`.
pub fn node_weight(grid: &Grid, idx: usize, support: Support) -> f64 {
    match support {
        Support::Interior => {
            if grid.is_interior(idx) {
                grid.cell_volume()
            } else {
                0.0
            }
        }
        Support::Full => {
            let ij = grid.multi_index(idx);
            (0..grid.dim())
                .map(|axis| {
                    let h = grid.spacing[axis];
                    if ij[axis] == 0 || ij[axis] == grid.points[axis] - 1 {
                        0.5 * h
                    } else {
                        h
                    }
                })
                .product()
        }
    }
}

pub fn integrate(f: &ScalarField, support: Support) -> f64 {
    let grid = f.grid();
    f.values()
        .iter()
        .enumerate()
        .map(|(idx, v)| node_weight(grid, idx, support) * v)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_small_or_empty_grids() {
        assert!(Grid::line(4, 0.0, 1.0).is_err());
        assert!(Grid::line(5, 1.0, 1.0).is_err());
        assert!(Grid::new(&[5, 5, 5], &[(0.0, 1.0); 3]).is_err());
        assert!(Grid::new(&[5, 5], &[(0.0, 1.0)]).is_err());
        assert!(TimeAxis::new(1).is_err());
    }

    #[test]
    fn nodes_and_layers() {
        let g = Grid::new(&[5, 7], &[(0.0, 1.0), (-1.0, 2.0)]).unwrap();
        assert_eq!(g.len(), 35);
        assert_eq!(g.spacing(), &[0.25, 0.5]);
        let idx = g.index([4, 6]);
        assert_eq!(g.coord(idx), [1.0, 2.0]);
        assert_eq!(g.interior_nodes().len(), 3 * 5);
        assert_eq!(g.core_nodes().len(), 3);
        assert_eq!(g.depth(g.index([2, 3])), 2);
    }

    #[test]
    fn extension_keeps_nodes_aligned() {
        let g = Grid::line(9, -1.0, 1.0).unwrap();
        let e = g.extended(3);
        for idx in 0..g.len() {
            let j = g.index_in_extended(idx, 3, &e);
            assert!((g.coord(idx)[0] - e.coord(j)[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_of_linear_is_exact() {
        let g = Grid::line(9, -1.0, 3.0).unwrap();
        let d = gradient_fd(&g.sample(|x| x[0]));
        for idx in g.interior_nodes() {
            assert!((d.get(idx).unwrap()[0] - 1.0).abs() < 1e-14);
        }
        assert!(d.get(0).is_none());
    }

    #[test]
    fn gradient_of_half_square_2d() {
        let g = Grid::square(7, -1.0, 1.0).unwrap();
        let d = gradient_fd(&g.sample(|x| 0.5 * x[0] * x[0]));
        for idx in g.interior_nodes() {
            let x = g.coord(idx);
            let v = d.get(idx).unwrap();
            assert!((v[0] - x[0]).abs() < 1e-14);
            assert!(v[1].abs() < 1e-14);
        }
    }

    #[test]
    fn hessian_of_quadratics_is_exact() {
        let g = Grid::line(9, -2.0, 2.0).unwrap();
        let h = hessian_fd(&g.sample(|x| 0.5 * x[0] * x[0]));
        for idx in g.interior_nodes() {
            assert!((h.get(idx).unwrap().xx() - 1.0).abs() < 1e-13);
        }
        let g = Grid::square(9, -1.0, 2.0).unwrap();
        let h = hessian_fd(&g.sample(|x| 0.5 * x[0] * x[0] + x[0] * x[1] + x[1] * x[1]));
        for idx in g.interior_nodes() {
            let m = h.get(idx).unwrap();
            assert!((m.xx() - 1.0).abs() < 1e-12);
            assert!((m.xy() - 1.0).abs() < 1e-12);
            assert!((m.yy() - 2.0).abs() < 1e-12);
        }
    }

    fn sin_errors(points: usize) -> (f64, f64) {
        let g = Grid::line(points, -PI, PI).unwrap();
        let f = g.sample(|x| x[0].sin());
        let d = gradient_fd(&f);
        let h = hessian_fd(&f);
        let mut e1: f64 = 0.0;
        let mut e2: f64 = 0.0;
        for idx in g.interior_nodes() {
            let x = g.coord(idx)[0];
            e1 = e1.max((d.get(idx).unwrap()[0] - x.cos()).abs());
            e2 = e2.max((h.get(idx).unwrap().xx() + x.sin()).abs());
        }
        (e1, e2)
    }

    #[test]
    fn sine_derivatives_converge_at_second_order() {
        let (g1, h1) = sin_errors(65);
        let (g2, h2) = sin_errors(129);
        let hh = 2.0 * PI / 128.0;
        assert!(g2 <= 0.2 * hh * hh, "gradient error {g2}");
        assert!((g1 / g2).log2() > 1.9);
        assert!((h1 / h2).log2() >= 1.9);
    }

    #[test]
    fn hessian_adjoint_matches_pairing() {
        let g = Grid::square(7, 0.0, 1.0).unwrap();
        let f = g.sample(|x| (3.0 * x[0]).sin() * (1.0 + x[1] * x[1]));
        let weights: Vec<SymMat> = (0..g.len())
            .map(|i| {
                let x = g.coord(i);
                SymMat::new2(1.0 + x[0], x[1] - 0.3, 2.0 - x[0] * x[1])
            })
            .collect();
        let h = hessian_fd(&f);
        let direct: f64 = g
            .interior_nodes()
            .into_iter()
            .map(|i| weights[i].frobenius(&h.get(i).unwrap()))
            .sum();
        let adj = hessian_fd_adjoint(&g, &weights).unwrap();
        let via_adjoint: f64 = adj.iter().zip(f.values()).map(|(a, b)| a * b).sum();
        assert!((direct - via_adjoint).abs() < 1e-10 * direct.abs().max(1.0));
    }

    #[test]
    fn integrate_constants_and_square() {
        let g = Grid::line(5, 0.0, 1.0).unwrap();
        assert!((integrate(&ScalarField::constant(&g, 1.0), Support::Full) - 1.0).abs() < 1e-15);
        let g2 = Grid::square(5, 0.0, 1.0).unwrap();
        assert!((integrate(&ScalarField::constant(&g2, 1.0), Support::Full) - 1.0).abs() < 1e-15);
        // interior support drops the outer half cells
        assert!(
            (integrate(&ScalarField::constant(&g, 1.0), Support::Interior) - 0.75).abs() < 1e-15
        );

        let coarse = integrate(
            &Grid::line(65, 0.0, 1.0).unwrap().sample(|x| x[0] * x[0]),
            Support::Full,
        );
        let fine = integrate(
            &Grid::line(129, 0.0, 1.0).unwrap().sample(|x| x[0] * x[0]),
            Support::Full,
        );
        assert!((coarse - 1.0 / 3.0).abs() < 1e-3);
        let order = ((coarse - 1.0 / 3.0) / (fine - 1.0 / 3.0)).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }

    #[test]
    fn field_validation() {
        let g = Grid::line(5, 0.0, 1.0).unwrap();
        assert!(ScalarField::new(g.clone(), vec![0.0; 4]).is_err());
        assert!(ScalarField::new(g.clone(), vec![0.0, 1.0, f64::NAN, 0.0, 0.0]).is_err());
        let other = Grid::line(6, 0.0, 1.0).unwrap();
        assert!(ScalarField::constant(&g, 1.0)
            .add(&ScalarField::constant(&other, 1.0))
            .is_err());
    }
}
