//! Scenario files.
//!
//! ```json
//! {
//!   "grid": { "dim": 1, "points": 33, "box": [-0.5, 0.5] },
//!   "time": { "steps": 16 },
//!   "background": { "preset": "quadratic" },
//!   "phi0": { "preset": "zero" },
//!   "phi1": { "preset": "quadratic-bump", "amplitude": 1.0 },
//!   "coupling": { "lambda_schedule": [0, 1], "velocity_form": "derived" },
//!   "solver": { "max_iterations": 50, "initial_path": "oracle" },
//!   "output_dir": "out"
//! }
//! ```
//!
//! Fields may also be tabulated as `{ "values": [...] }` in grid order
//! (x fastest).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use magtor_core::{
    oracle_geodesic, oracle_geodesic_extended, Grid, InitialPath, Method, OraclePath,
    PotentialPath, Profile, ScalarField, SolverConfig, Stencil, TimeAxis, ToricBackground,
    ToricPotential, VelocityForm,
};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    /// Nodes per axis.
    pub points: usize,
    #[serde(rename = "box")]
    pub bounds: [f64; 2],
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, CliError> {
        let [a, b] = self.bounds;
        let grid = match self.dim {
            1 => Grid::line(self.points, a, b),
            2 => Grid::square(self.points, a, b),
            d => {
                return Err(CliError::Config(format!(
                    "grid.dim must be 1 or 2, got {d}"
                )))
            }
        };
        grid.map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSpec {
    Preset(Profile),
    Table { values: Vec<f64> },
}

impl FieldSpec {
    pub fn sample(&self, grid: &Grid, what: &str) -> Result<ScalarField, CliError> {
        match self {
            FieldSpec::Preset(p) => Ok(p.sample(grid)),
            FieldSpec::Table { values } => ScalarField::new(grid.clone(), values.clone())
                .map_err(|e| CliError::Config(format!("{what}: {e}"))),
        }
    }

    pub fn profile(&self) -> Option<Profile> {
        match self {
            FieldSpec::Preset(p) => Some(*p),
            FieldSpec::Table { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CouplingSpec {
    pub lambda_schedule: Vec<f64>,
    pub velocity_form: VelocityForm,
}

impl Default for CouplingSpec {
    fn default() -> Self {
        Self {
            lambda_schedule: vec![0.0],
            velocity_form: VelocityForm::Derived,
        }
    }
}

/// Solver settings other than the coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSpec {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub initial_step: f64,
    pub backtracking: f64,
    pub armijo: f64,
    pub convexity_margin: f64,
    pub method: Method,
    pub initial_path: InitialPath,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            max_iterations: d.max_iterations,
            gradient_tolerance: d.gradient_tolerance,
            initial_step: d.initial_step,
            backtracking: d.backtracking,
            armijo: d.armijo,
            convexity_margin: d.convexity_margin,
            method: d.method,
            initial_path: d.initial_path,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GradCheckSpec {
    pub directions: usize,
    pub epsilon: f64,
    pub stencil: Stencil,
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    /// Couplings to check; the coupling schedule when absent.
    pub lambdas: Option<Vec<f64>>,
}

impl Default for GradCheckSpec {
    fn default() -> Self {
        Self {
            directions: 20,
            epsilon: 1e-5,
            stencil: Stencil::FourPoint,
            rel_tolerance: 1e-5,
            abs_tolerance: 1e-10,
            lambdas: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualSpec {
    pub points: usize,
    #[serde(rename = "box")]
    pub bounds: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSpec {
    /// Largest accepted L∞ distance between solver and oracle paths.
    pub tolerance: f64,
    /// Explicit dual grid; without it the endpoints must be presets and the
    /// oracle is built on an enlarged box.
    pub dual: Option<DualSpec>,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            tolerance: 1e-3,
            dual: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub grid: GridSpec,
    pub time: TimeSpec,
    #[serde(default = "default_background")]
    pub background: FieldSpec,
    pub phi0: FieldSpec,
    pub phi1: FieldSpec,
    #[serde(default)]
    pub coupling: CouplingSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub gradcheck: GradCheckSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
}

fn default_background() -> FieldSpec {
    FieldSpec::Preset(Profile::standard_background())
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Everything a run needs, checked up front.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub scenario: Scenario,
    pub grid: Grid,
    pub time: TimeAxis,
    pub background: ToricBackground,
    pub phi0: ToricPotential,
    pub phi1: ToricPotential,
    pub solver: SolverConfig,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        SolverConfig {
            max_iterations: s.max_iterations,
            gradient_tolerance: s.gradient_tolerance,
            initial_step: s.initial_step,
            backtracking: s.backtracking,
            armijo: s.armijo,
            convexity_margin: s.convexity_margin,
            lambda_schedule: self.coupling.lambda_schedule.clone(),
            velocity_form: self.coupling.velocity_form,
            rng_seed: self.seed,
            method: s.method,
            initial_path: s.initial_path,
        }
    }

    pub fn resolve(self) -> Result<Resolved, CliError> {
        let grid = self.grid.build()?;
        let time =
            TimeAxis::new(self.time.steps).map_err(|e| CliError::Config(format!("time: {e}")))?;
        let solver = self.solver_config();
        solver
            .validate()
            .map_err(|e| CliError::Config(format!("solver: {e}")))?;
        let gc = &self.gradcheck;
        if gc.directions == 0 || !(gc.epsilon > 0.0) {
            return Err(CliError::Config(
                "gradcheck needs at least one direction and a positive epsilon".into(),
            ));
        }
        let background = ToricBackground::new(self.background.sample(&grid, "background")?)
            .map_err(CliError::precondition("background"))?;
        let phi0 = ToricPotential::new(&background, self.phi0.sample(&grid, "phi0")?)
            .map_err(CliError::precondition("phi0"))?;
        let phi1 = ToricPotential::new(&background, self.phi1.sample(&grid, "phi1")?)
            .map_err(CliError::precondition("phi1"))?;
        Ok(Resolved {
            scenario: self,
            grid,
            time,
            background,
            phi0,
            phi1,
            solver,
        })
    }
}

impl Resolved {
    pub fn presets(&self) -> Option<(Profile, Profile, Profile)> {
        let s = &self.scenario;
        Some((
            s.background.profile()?,
            s.phi0.profile()?,
            s.phi1.profile()?,
        ))
    }

    /// Oracle path: explicit dual grid when given, enlarged box otherwise.
    pub fn oracle(&self) -> Result<OraclePath, CliError> {
        match &self.scenario.oracle.dual {
            Some(d) => {
                let [a, b] = d.bounds;
                let dual = match self.grid.dim() {
                    1 => Grid::line(d.points, a, b),
                    _ => Grid::square(d.points, a, b),
                }
                .map_err(|e| CliError::Config(format!("oracle.dual: {e}")))?;
                Ok(oracle_geodesic(&self.phi0, &self.phi1, self.time, &dual)?)
            }
            None => {
                let (bg, p0, p1) = self.presets().ok_or_else(|| {
                    CliError::Config("oracle without oracle.dual needs preset fields".into())
                })?;
                Ok(oracle_geodesic_extended(
                    &bg, &p0, &p1, &self.grid, self.time,
                )?)
            }
        }
    }

    /// Starting path of the solver and the label it runs under.
    pub fn initial_path(&self) -> Result<(PotentialPath, InitialPath), CliError> {
        match self.solver.initial_path {
            InitialPath::Linear => Ok((
                PotentialPath::linear(&self.phi0, &self.phi1, self.time)?,
                InitialPath::Linear,
            )),
            InitialPath::Oracle => {
                let o = self.oracle()?;
                if !o.fully_trusted() {
                    return Err(CliError::Coverage(
                        "oracle start does not cover every node".into(),
                    ));
                }
                Ok((o.path, InitialPath::Oracle))
            }
        }
    }
}
