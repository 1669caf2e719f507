//! Discrete Legendre–Fenchel transform.
//!
//! The maximizing source node is found by brute force. The value is then
//! refined by maximizing `⟨x, y⟩ − P(x)` over the local cubic (4 points per
//! axis) interpolant `P` of the source around that node, which removes the
//! sawtooth error of the plain grid maximum.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField};

/// `F*(y) = max_x ⟨x, y⟩ − F(x)` at every node of `dual`.
///
/// Fails with a range-coverage error when some maximum sits on the outermost
/// source layer, i.e. the slopes of `F` do not reach `y`.
pub fn legendre(f: &ScalarField, dual: &Grid) -> Result<ScalarField> {
    let (out, trusted) = legendre_masked(f, dual)?;
    if let Some(j) = trusted.iter().position(|t| !t) {
        let y = dual.coord(j);
        return Err(Error::RangeCoverage(format!(
            "slope range of the source does not cover dual node {j} at {:?}",
            &y[..dual.dim()]
        )));
    }
    Ok(out)
}

/// Like [`legendre`] but never fails on coverage; the second component flags
/// the dual nodes whose maximizer is interior to the source grid.
pub fn legendre_masked(f: &ScalarField, dual: &Grid) -> Result<(ScalarField, Vec<bool>)> {
    let src = f.grid();
    if src.dim() != dual.dim() {
        return Err(Error::Argument(format!(
            "source is {}-D but dual grid is {}-D",
            src.dim(),
            dual.dim()
        )));
    }
    let coords: Vec<[f64; 2]> = (0..src.len()).map(|i| src.coord(i)).collect();
    let mut out = vec![0.0; dual.len()];
    let mut trusted = vec![false; dual.len()];
    for j in 0..dual.len() {
        let y = dual.coord(j);
        let (best, value) = argmax(&coords, f.values(), &y);
        trusted[j] = src.depth(best) >= 1;
        out[j] = if trusted[j] {
            refine(src, f.values(), best, &y).map_or(value, |r| r.max(value))
        } else {
            value
        };
    }
    Ok((ScalarField::from_raw(dual.clone(), out), trusted))
}

fn argmax(coords: &[[f64; 2]], f: &[f64], y: &[f64; 2]) -> (usize, f64) {
    let mut best = 0;
    let mut value = f64::NEG_INFINITY;
    for (i, (x, fx)) in coords.iter().zip(f).enumerate() {
        let v = x[0] * y[0] + x[1] * y[1] - fx;
        if v > value {
            best = i;
            value = v;
        }
    }
    (best, value)
}

/// Value, first and second derivative of the four cubic Lagrange basis
/// polynomials on nodes 0, 1, 2, 3.
fn lagrange4(u: f64) -> [[f64; 4]; 3] {
    let mut out = [[0.0; 4]; 3];
    for j in 0..4 {
        let others: Vec<f64> = (0..4).filter(|&m| m != j).map(|m| m as f64).collect();
        let scale: f64 = others.iter().map(|m| j as f64 - m).product();
        let (a, b, c) = (u - others[0], u - others[1], u - others[2]);
        out[0][j] = a * b * c / scale;
        out[1][j] = (b * c + a * c + a * b) / scale;
        out[2][j] = 2.0 * (a + b + c) / scale;
    }
    out
}

fn objective(
    src: &Grid,
    f: &[f64],
    start: [usize; 2],
    u: [f64; 2],
    y: &[f64; 2],
) -> (f64, [f64; 2], [[f64; 2]; 2]) {
    let dim = src.dim();
    let h = src.spacing();
    let bx = lagrange4(u[0]);
    let by = if dim == 2 {
        lagrange4(u[1])
    } else {
        [[1.0, 0.0, 0.0, 0.0], [0.0; 4], [0.0; 4]]
    };
    let ny = if dim == 2 { 4 } else { 1 };
    // P and its derivatives in local coordinates
    let (mut p, mut px, mut py, mut pxx, mut pxy, mut pyy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for b in 0..ny {
        for a in 0..4 {
            let v = f[src.index([start[0] + a, start[1] + b])];
            p += v * bx[0][a] * by[0][b];
            px += v * bx[1][a] * by[0][b];
            pxx += v * bx[2][a] * by[0][b];
            if dim == 2 {
                py += v * bx[0][a] * by[1][b];
                pxy += v * bx[1][a] * by[1][b];
                pyy += v * bx[0][a] * by[2][b];
            }
        }
    }
    let lo = [
        src.bounds(0).0,
        if dim == 2 { src.bounds(1).0 } else { 0.0 },
    ];
    let mut value = -p;
    let mut grad = [y[0] * h[0] - px, 0.0];
    let mut hess = [[-pxx, 0.0], [0.0, 0.0]];
    value += y[0] * (lo[0] + (start[0] as f64 + u[0]) * h[0]);
    if dim == 2 {
        value += y[1] * (lo[1] + (start[1] as f64 + u[1]) * h[1]);
        grad[1] = y[1] * h[1] - py;
        hess = [[-pxx, -pxy], [-pxy, -pyy]];
    }
    (value, grad, hess)
}

fn refine(src: &Grid, f: &[f64], best: usize, y: &[f64; 2]) -> Option<f64> {
    let dim = src.dim();
    let ij = src.multi_index(best);
    let mut start = [0usize; 2];
    let mut u = [0.0; 2];
    for axis in 0..dim {
        let n = src.points()[axis];
        let s = src.stride(axis);
        let at = |k: usize| {
            let x = src.coord(k);
            x[0] * y[0] + x[1] * y[1] - f[k]
        };
        let rightward = at(best + s) >= at(best - s);
        let i = ij[axis];
        let st = if rightward {
            i as isize - 1
        } else {
            i as isize - 2
        };
        start[axis] = st.clamp(0, n as isize - 4) as usize;
        u[axis] = (i - start[axis]) as f64;
    }
    for _ in 0..30 {
        let (_, g, hm) = objective(src, f, start, u, y);
        let step = if dim == 1 {
            if !(hm[0][0] < 0.0) {
                return None;
            }
            [-g[0] / hm[0][0], 0.0]
        } else {
            let det = hm[0][0] * hm[1][1] - hm[0][1] * hm[0][1];
            if !(hm[0][0] < 0.0 && det > 0.0) {
                return None;
            }
            [
                -(hm[1][1] * g[0] - hm[0][1] * g[1]) / det,
                -(hm[0][0] * g[1] - hm[0][1] * g[0]) / det,
            ]
        };
        for axis in 0..dim {
            u[axis] += step[axis];
            if !(0.0..=3.0).contains(&u[axis]) {
                return None;
            }
        }
        // value error is quadratic in the remaining step
        if step[0].abs().max(step[1].abs()) < 1e-9 {
            return Some(objective(src, f, start, u, y).0);
        }
    }
    None
}
