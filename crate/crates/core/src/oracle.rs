//! Classical toric geodesics by linear interpolation of Legendre duals.
//!
//! `F_t = ((1 − t)·F₀* + t·F₁*)*`. On a truncated box the outer transform is
//! only meaningful at primal nodes whose slope lies inside the dual box, so
//! every oracle path carries a per-node trust mask.

use crate::error::{Error, Result};
use crate::grid::{Grid, ScalarField, TimeAxis};
use crate::legendre::{legendre, legendre_masked};
use crate::ma::{ToricBackground, ToricPotential};
use crate::path::PotentialPath;
use crate::presets::Profile;

/// When some node is untrusted the path is returned without the convexity
/// check; only trusted nodes are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct OraclePath {
    pub path: PotentialPath,
    /// `trusted[k][node]`; endpoint slices are exact and fully trusted.
    pub trusted: Vec<Vec<bool>>,
}

impl OraclePath {
    pub fn fully_trusted(&self) -> bool {
        self.trusted.iter().all(|s| s.iter().all(|&t| t))
    }
}

fn interpolate_duals(
    background: &ToricBackground,
    phi0: &ScalarField,
    phi1: &ScalarField,
    g0: &ScalarField,
    g1: &ScalarField,
    time: TimeAxis,
) -> Result<OraclePath> {
    let grid = background.grid();
    let f0 = background.f0().values();
    let mut slices = vec![phi0.clone()];
    let mut trusted = vec![vec![true; grid.len()]];
    for k in 1..time.steps() {
        let t = time.knot(k);
        let g = g0.zip_with(g1, |a, b| (1.0 - t) * a + t * b)?;
        let (ft, mask) = legendre_masked(&g, grid)?;
        let phi = ft.values().iter().zip(f0).map(|(a, b)| a - b).collect();
        slices.push(ScalarField::new(grid.clone(), phi)?);
        trusted.push(mask);
    }
    slices.push(phi1.clone());
    trusted.push(vec![true; grid.len()]);
    let complete = trusted.iter().all(|s| s.iter().all(|&t| t));
    let path = if complete {
        PotentialPath::from_slices(background, time, slices)?
    } else {
        // untrusted nodes may be affine pieces of the sup, not strictly convex
        PotentialPath::from_slices_unchecked(background, time, slices)
    };
    Ok(OraclePath { path, trusted })
}

/// Oracle from discrete endpoints and an explicit dual grid.
///
/// Fails with a range-coverage error when the slopes of either endpoint do
/// not cover `dual`.
pub fn oracle_geodesic(
    phi0: &ToricPotential,
    phi1: &ToricPotential,
    time: TimeAxis,
    dual: &Grid,
) -> Result<OraclePath> {
    if phi0.background() != phi1.background() {
        return Err(Error::Argument(
            "endpoints use different backgrounds".into(),
        ));
    }
    let g0 = legendre(&phi0.total(), dual)?;
    let g1 = legendre(&phi1.total(), dual)?;
    interpolate_duals(phi0.background(), phi0.phi(), phi1.phi(), &g0, &g1, time)
}

/// Largest number of nodes per axis of an extended source grid.
fn extension_cap(dim: usize) -> usize {
    if dim == 1 {
        20_000
    } else {
        300
    }
}

/// Oracle for closed-form endpoints.
///
/// The dual box is the hull of the endpoint slopes over the working grid,
/// padded by a few dual cells, with the working spacing. The endpoints are
/// sampled on an aligned, enlarged copy of the working grid, grown until
/// both inner transforms are covered; the padding is grown until every
/// working node of every slice is trusted.
pub fn oracle_geodesic_extended(
    background: &Profile,
    phi0: &Profile,
    phi1: &Profile,
    grid: &Grid,
    time: TimeAxis,
) -> Result<OraclePath> {
    let bg = ToricBackground::new(background.sample(grid))?;
    let p0 = ToricPotential::new(&bg, phi0.sample(grid))?;
    let p1 = ToricPotential::new(&bg, phi1.sample(grid))?;
    let dim = grid.dim();
    let h = grid.spacing().to_vec();

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for idx in 0..grid.len() {
        let x = &grid.coord(idx)[..dim];
        let gb = background.gradient(x);
        for p in [phi0, phi1] {
            let gp = p.gradient(x);
            for axis in 0..dim {
                let s = gb[axis] + gp[axis];
                lo[axis] = lo[axis].min(s);
                hi[axis] = hi[axis].max(s);
            }
        }
    }

    let mut pad = 2usize;
    while pad <= 64 {
        let mut points = Vec::with_capacity(dim);
        let mut bounds = Vec::with_capacity(dim);
        for axis in 0..dim {
            let cells = ((hi[axis] - lo[axis]) / h[axis]).ceil() as usize + 2 * pad;
            let a = lo[axis] - pad as f64 * h[axis];
            points.push(cells.max(4) + 1);
            bounds.push((a, a + cells.max(4) as f64 * h[axis]));
        }
        let dual = Grid::new(&points, &bounds)?;

        let mut duals = None;
        let mut layers = 4usize;
        while grid.points()[0] + 2 * layers <= extension_cap(dim) {
            let ext = grid.extended(layers);
            let e0 = ext.sample(|x| background.eval(x) + phi0.eval(x));
            let e1 = ext.sample(|x| background.eval(x) + phi1.eval(x));
            let (g0, m0) = legendre_masked(&e0, &dual)?;
            let (g1, m1) = legendre_masked(&e1, &dual)?;
            if m0.iter().chain(&m1).all(|&t| t) {
                duals = Some((g0, g1));
                break;
            }
            layers *= 2;
        }
        let Some((g0, g1)) = duals else {
            return Err(Error::RangeCoverage(format!(
                "endpoint slopes do not cover the dual box within {} nodes per axis",
                extension_cap(dim)
            )));
        };
        let oracle = interpolate_duals(&bg, p0.phi(), p1.phi(), &g0, &g1, time)?;
        if oracle.fully_trusted() {
            return Ok(oracle);
        }
        pad *= 2;
    }
    Err(Error::RangeCoverage(
        "interpolated duals do not cover the working grid".into(),
    ))
}
