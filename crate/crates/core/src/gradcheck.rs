//! Directional finite-difference check of [`lh_gradient`](crate::lh_gradient).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::functional::{free_gradient, lh, CouplingConfig};
use crate::path::PotentialPath;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckEntry {
    pub direction_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub abs_error: f64,
    /// `|analytic − numeric| / max(|analytic|, |numeric|)`, zero when both vanish.
    pub rel_error: f64,
}

impl GradCheckEntry {
    pub fn passes(&self, rel_tol: f64, abs_tol: f64) -> bool {
        self.rel_error <= rel_tol || self.abs_error <= abs_tol
    }
}

/// Central difference used for the numeric directional derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// `(f(ε) − f(−ε))/(2ε)`
    TwoPoint,
    /// `(f(−2ε) − 8f(−ε) + 8f(ε) − f(2ε))/(12ε)`; exact for the quartic
    /// polynomials `lh` is in the free values, up to rounding.
    #[default]
    FourPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckOptions {
    pub directions: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub stencil: Stencil,
}

impl Default for GradCheckOptions {
    fn default() -> Self {
        Self {
            directions: 20,
            epsilon: 1e-5,
            seed: 0,
            stencil: Stencil::FourPoint,
        }
    }
}

/// Random smooth variation on the free values: a combination of the first
/// three sine modes in time and in each space direction, restricted to the
/// core nodes of the inner knots.
pub fn random_direction(path: &PotentialPath, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let layout = path.layout();
    let grid = path.grid();
    let dim = grid.dim();
    let m = path.time().steps();
    let pts = grid.points();
    let modes_y = if dim == 2 { 3 } else { 1 };
    let mut coef = vec![0.0; 3 * 3 * modes_y];
    for c in coef.iter_mut() {
        *c = rng.gen_range(-1.0..1.0);
    }
    let mut out = vec![0.0; layout.len()];
    for k in 1..m {
        let st = k as f64 / m as f64;
        for (c, &idx) in layout.core.iter().enumerate() {
            let ij = grid.multi_index(idx);
            let sx = (ij[0] as f64 - 1.0) / (pts[0] as f64 - 3.0);
            let sy = if dim == 2 {
                (ij[1] as f64 - 1.0) / (pts[1] as f64 - 3.0)
            } else {
                0.5
            };
            let mut v = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    for e in 0..modes_y {
                        let w = coef[(a * 3 + b) * modes_y + e];
                        let fy = if dim == 2 {
                            (PI * (e + 1) as f64 * sy).sin()
                        } else {
                            1.0
                        };
                        v += w
                            * (PI * (a + 1) as f64 * st).sin()
                            * (PI * (b + 1) as f64 * sx).sin()
                            * fy;
                    }
                }
            }
            out[layout.at(k, c)] = v;
        }
    }
    out
}

/// Compare `⟨∇lh, ψ⟩` with a central difference of `s ↦ lh(φ + sψ)` for
/// seeded random `ψ`.
pub fn gradient_check(
    path: &PotentialPath,
    cfg: &CouplingConfig,
    opts: &GradCheckOptions,
) -> Vec<GradCheckEntry> {
    let layout = path.layout();
    let g = free_gradient(path, cfg, &layout);
    let x = path.free_values();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let eps = opts.epsilon;
    (0..opts.directions)
        .map(|direction_index| {
            let psi = random_direction(path, &mut rng);
            let analytic: f64 = g.iter().zip(&psi).map(|(a, b)| a * b).sum();
            let shifted = |s: f64| {
                let xs: Vec<f64> = x.iter().zip(&psi).map(|(a, b)| a + s * b).collect();
                lh(&path.with_free_unchecked(&layout, &xs), cfg)
            };
            let numeric = match opts.stencil {
                Stencil::TwoPoint => (shifted(eps) - shifted(-eps)) / (2.0 * eps),
                Stencil::FourPoint => {
                    (shifted(-2.0 * eps) - 8.0 * shifted(-eps) + 8.0 * shifted(eps)
                        - shifted(2.0 * eps))
                        / (12.0 * eps)
                }
            };
            let abs_error = (analytic - numeric).abs();
            let scale = analytic.abs().max(numeric.abs());
            GradCheckEntry {
                direction_index,
                analytic,
                numeric,
                abs_error,
                rel_error: if scale > 0.0 { abs_error / scale } else { 0.0 },
            }
        })
        .collect()
}
