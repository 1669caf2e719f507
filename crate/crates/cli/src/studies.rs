//! Mesh-refinement helpers shared by the acceptance suite and the docs.

use std::path::PathBuf;

use magtor_core::{PotentialPath, Profile, ResidualReport};

use crate::scenario::{
    CouplingSpec, FieldSpec, GradCheckSpec, GridSpec, OracleSpec, Scenario, SolverSpec, TimeSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Mesh {
    pub points: usize,
    pub steps: usize,
}

/// Space and time steps halved together.
pub const MESHES: [Mesh; 3] = [
    Mesh {
        points: 33,
        steps: 16,
    },
    Mesh {
        points: 65,
        steps: 32,
    },
    Mesh {
        points: 129,
        steps: 64,
    },
];

/// `log2(e_i / e_{i+1})` for successive halvings.
pub fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn scenario(dim: usize, mesh: Mesh, phi1: Profile, schedule: &[f64]) -> Scenario {
    Scenario {
        grid: GridSpec {
            dim,
            points: mesh.points,
            bounds: [-0.5, 0.5],
        },
        time: TimeSpec { steps: mesh.steps },
        background: FieldSpec::Preset(Profile::standard_background()),
        phi0: FieldSpec::Preset(Profile::Zero),
        phi1: FieldSpec::Preset(phi1),
        coupling: CouplingSpec {
            lambda_schedule: schedule.to_vec(),
            ..CouplingSpec::default()
        },
        solver: SolverSpec::default(),
        gradcheck: GradCheckSpec::default(),
        oracle: OracleSpec::default(),
        seed: 0,
        output_dir: PathBuf::from("out"),
    }
}

/// `F₀ = |x|²/2`, `φ₀ = 0`, `φ₁ = |x|²/2` on `[−½, ½]ⁿ`.
pub fn quadratic_family(dim: usize, mesh: Mesh, schedule: &[f64]) -> Scenario {
    scenario(dim, mesh, Profile::Quadratic { amplitude: 1.0 }, schedule)
}

/// Same background with a compactly supported bump as end perturbation.
pub fn bump_family(mesh: Mesh) -> Scenario {
    scenario(
        1,
        mesh,
        Profile::Bump {
            amplitude: 0.02,
            radius: 0.4,
        },
        &[0.0],
    )
}

/// `φ_t(x) = |x|²/(2 − t) − |x|²/2`, the classical geodesic of [`quadratic_family`].
pub fn quadratic_geodesic(t: f64, x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    r2 / (2.0 - t) - 0.5 * r2
}

/// Max over all slices and nodes of the distance to [`quadratic_geodesic`].
pub fn quadratic_geodesic_error(path: &PotentialPath) -> f64 {
    let grid = path.grid();
    let time = path.time();
    let mut err: f64 = 0.0;
    for (k, s) in path.slices().iter().enumerate() {
        let t = time.knot(k);
        for (idx, v) in s.values().iter().enumerate() {
            let x = grid.coord(idx);
            err = err.max((v - quadratic_geodesic(t, &x[..grid.dim()])).abs());
        }
    }
    err
}

/// Largest deviation of the values from their mean.
pub fn spread(values: &[f64]) -> f64 {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().fold(0.0, |m, v| m.max((v - mean).abs()))
}

/// L∞ norm of a residual restricted to the points of a coarser mesh: its
/// core nodes at its inner knots. Comparing every mesh on the same points
/// keeps the maximum from drifting with the moving last knot and core layer.
pub fn linf_on_mesh(report: &ResidualReport, coarse: Mesh) -> f64 {
    let grid = report.grid();
    let sx = (grid.points()[0] - 1) / (coarse.points - 1);
    let st = report.time().steps() / coarse.steps;
    let dim = grid.dim();
    let mut out: f64 = 0.0;
    for kr in report.knots() {
        if kr.knot % st != 0 {
            continue;
        }
        for (idx, v) in kr.field.values().iter().enumerate() {
            let ij = grid.multi_index(idx);
            let on_mesh = ij[..dim]
                .iter()
                .all(|&i| i % sx == 0 && i / sx >= 2 && i / sx + 2 < coarse.points);
            if on_mesh {
                out = out.max(v.abs());
            }
        }
    }
    out
}
