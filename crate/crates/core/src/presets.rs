//! Analytic potentials used as backgrounds and endpoint perturbations.

use serde::{Deserialize, Serialize};

use crate::grid::{Grid, ScalarField};

/// Closed-form radial profiles, `r = |x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Profile {
    Zero,
    /// `a·r²/2`
    #[serde(alias = "quadratic-bump")]
    Quadratic {
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// `a·r⁴/12`
    #[serde(alias = "quartic-bump")]
    Quartic {
        #[serde(default = "unit")]
        amplitude: f64,
    },
    /// `a·exp(1 − 1/(1 − r²/ρ²))` inside `r < ρ`, zero outside; peak value `a`.
    Bump {
        amplitude: f64,
        radius: f64,
    },
}

fn unit() -> f64 {
    1.0
}

impl Profile {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        match *self {
            Profile::Zero => 0.0,
            Profile::Quadratic { amplitude } => 0.5 * amplitude * r2,
            Profile::Quartic { amplitude } => amplitude * r2 * r2 / 12.0,
            Profile::Bump { amplitude, radius } => {
                let s = r2 / (radius * radius);
                if s < 1.0 {
                    amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn gradient(&self, x: &[f64]) -> [f64; 2] {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        // every profile is radial: ∇f = g(r²)·x
        let g = match *self {
            Profile::Zero => 0.0,
            Profile::Quadratic { amplitude } => amplitude,
            Profile::Quartic { amplitude } => amplitude * r2 / 3.0,
            Profile::Bump { amplitude, radius } => {
                let s = r2 / (radius * radius);
                if s < 1.0 {
                    let f = amplitude * (1.0 - 1.0 / (1.0 - s)).exp();
                    -f * 2.0 / ((1.0 - s) * (1.0 - s) * radius * radius)
                } else {
                    0.0
                }
            }
        };
        let mut out = [0.0; 2];
        for (o, v) in out.iter_mut().zip(x) {
            *o = g * v;
        }
        out
    }

    pub fn sample(&self, grid: &Grid) -> ScalarField {
        grid.sample(|x| self.eval(x))
    }

    /// The standard background `F₀ = |x|²/2`.
    pub fn standard_background() -> Self {
        Profile::Quadratic { amplitude: 1.0 }
    }
}
