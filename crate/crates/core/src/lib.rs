//! Discrete Landau–Hall functional on toric Kähler potentials.
//!
//! A toric potential is represented in the log chart by a strictly convex
//! function `F = F₀ + φ` sampled on a box in ℝⁿ, n ∈ {1, 2}. Paths of such
//! potentials are discretized in time, and the crate provides the discrete
//! energy and magnetic functional with exact adjoint gradients, residuals of
//! the continuous geodesic equations, a Legendre-transform oracle for
//! classical geodesics, and a Newton solver for discrete critical paths.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

mod banded;
pub mod error;
pub mod functional;
pub mod gradcheck;
pub mod grid;
pub mod legendre;
pub mod ma;
pub mod oracle;
pub mod path;
pub mod presets;
pub mod residuals;
pub mod solver;
pub mod sym;

pub use error::{Error, Result};
pub use functional::{
    energy, lh, lh_gradient, magnetic_term, nonconvex_velocity_intervals, CouplingConfig,
    PathGradient, VelocityForm,
};
pub use gradcheck::{gradient_check, GradCheckEntry, GradCheckOptions, Stencil};
pub use grid::{
    gradient_fd, hessian_fd, hessian_fd_adjoint, integrate, node_weight, Grid, HessField,
    ScalarField, Support, TimeAxis, VectorField,
};
pub use legendre::{legendre, legendre_masked};
pub use ma::{
    cofactor_pairing, factorial, ma_density, md, mixed_ma_density, ToricBackground, ToricPotential,
};
pub use oracle::{oracle_geodesic, oracle_geodesic_extended, OraclePath};
pub use path::{time_derivative, PotentialPath};
pub use presets::Profile;
pub use residuals::{
    corollary_residual, energy_profile, geodesic_residual, hcma_residual, magnetic_residual,
    KnotResidual, ResidualReport,
};
pub use solver::{
    solve, solve_from_path, InitialPath, Method, ResidualBundle, SolveResult, SolverConfig,
    StageTrace, TraceRecord,
};
pub use sym::SymMat;
