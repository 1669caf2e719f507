//! Fixtures shared by the kernel benchmarks.

use magtor_core::{Grid, PotentialPath, Profile, TimeAxis, ToricBackground, ToricPotential};

pub fn grid(dim: usize, points: usize) -> Grid {
    match dim {
        1 => Grid::line(points, -0.5, 0.5),
        _ => Grid::square(points, -0.5, 0.5),
    }
    .expect("bench grid")
}

/// Endpoints `0` and a quartic perturbation over the standard background.
pub fn endpoints(grid: &Grid) -> (ToricPotential, ToricPotential) {
    let bg = ToricBackground::new(Profile::standard_background().sample(grid)).expect("background");
    let p0 = ToricPotential::new(&bg, Profile::Zero.sample(grid)).expect("start");
    let p1 =
        ToricPotential::new(&bg, Profile::Quartic { amplitude: 1.0 }.sample(grid)).expect("end");
    (p0, p1)
}

pub fn linear_path(dim: usize, points: usize, steps: usize) -> PotentialPath {
    let g = grid(dim, points);
    let (p0, p1) = endpoints(&g);
    PotentialPath::linear(&p0, &p1, TimeAxis::new(steps).expect("steps")).expect("path")
}
