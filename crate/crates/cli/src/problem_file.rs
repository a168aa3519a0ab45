//! The problem-file format: strict TOML, unknown fields rejected.
//!
//! ```toml
//! orders         = [1.8, 2.2]
//! initial_values = [0.0, 0.0, 0.0]
//! horizon        = 1.0
//! rhs            = "gamma(1.6)/(2*gamma(1.4))*t^0.4 + ..."
//!
//! [grid]       # optional
//! n       = 2048
//! grading = 2.0
//!
//! [solver]     # optional
//! mode           = "picard"      # or "stepwise"
//! tolerance      = 1e-8
//! max_iterations = 200
//! damping        = 0.5
//!
//! [existence]  # optional
//! k       = 1.0
//! samples = 101
//!
//! [flags]      # optional
//! force                     = false
//! fractional_reconstruction = false
//! ```
//!
//! The `y` arguments of `rhs` map positionally to the derivative orders in
//! increasing order: `y1` is `D^{a_1} u`, .., `y_{n-1}` is `D^{a_{n-1}} u`.

use fracivp_core::expr;
use fracivp_core::{Grid, ProblemSpec, SolveOptions, SolverConfig, SolverMode};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_GRID_N: usize = 1024;
pub const DEFAULT_GRID_R: f64 = 2.0;
pub const DEFAULT_EXISTENCE_K: f64 = 1.0;
pub const DEFAULT_EXISTENCE_SAMPLES: usize = 101;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub orders: Vec<f64>,
    pub initial_values: Vec<f64>,
    pub horizon: f64,
    pub rhs: String,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub existence: ExistenceSection,
    #[serde(default)]
    pub flags: FlagsSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: usize,
    pub grading: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { n: DEFAULT_GRID_N, grading: DEFAULT_GRID_R }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub mode: String,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            mode: d.mode.name().to_string(),
            tolerance: d.tolerance,
            max_iterations: d.max_iterations,
            damping: d.damping,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExistenceSection {
    pub k: f64,
    pub samples: usize,
}

impl Default for ExistenceSection {
    fn default() -> Self {
        Self { k: DEFAULT_EXISTENCE_K, samples: DEFAULT_EXISTENCE_SAMPLES }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FlagsSection {
    #[serde(default)]
    pub force: bool,
    #[serde(default)]
    pub fractional_reconstruction: bool,
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub grid_n: Option<usize>,
    pub grid_r: Option<f64>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub force: bool,
    pub fractional_reconstruction: bool,
}

impl ProblemFile {
    pub fn parse(source: &str) -> Result<Self, CliError> {
        toml::from_str(source).map_err(|e| CliError::input(format!("problem file: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let source = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        Self::parse(&source)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(n) = o.grid_n {
            self.grid.n = n;
        }
        if let Some(r) = o.grid_r {
            self.grid.grading = r;
        }
        if let Some(t) = o.tol {
            self.solver.tolerance = t;
        }
        if let Some(m) = o.max_iter {
            self.solver.max_iterations = m;
        }
        self.flags.force |= o.force;
        self.flags.fractional_reconstruction |= o.fractional_reconstruction;
    }

    pub fn to_spec(&self) -> Result<ProblemSpec, CliError> {
        if self.orders.is_empty() {
            return Err(CliError::input("orders must not be empty".into()));
        }
        let arity = self.orders.len().saturating_sub(1);
        let rhs = expr::parse(&self.rhs, arity)
            .map_err(|e| CliError::input(format!("rhs: {e}")))?;
        ProblemSpec::new(self.orders.clone(), self.initial_values.clone(), self.horizon, rhs)
            .map_err(|e| CliError::input(format!("{e}")))
    }

    pub fn to_grid(&self) -> Result<Grid, CliError> {
        Grid::graded(self.horizon, self.grid.n, self.grid.grading)
            .map_err(|e| CliError::input(format!("grid: {e}")))
    }

    pub fn to_solver_config(&self) -> Result<SolverConfig, CliError> {
        let mode = match self.solver.mode.as_str() {
            "picard" => SolverMode::Picard,
            "stepwise" => SolverMode::StepWise,
            other => {
                return Err(CliError::input(format!(
                    "solver.mode must be \"picard\" or \"stepwise\", got \"{other}\""
                )))
            }
        };
        Ok(SolverConfig {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
            damping: self.solver.damping,
            mode,
        })
    }

    pub fn to_solve_options(&self) -> SolveOptions {
        SolveOptions {
            force: self.flags.force,
            fractional_reconstruction: self.flags.fractional_reconstruction,
        }
    }

    pub fn validate_existence(&self) -> Result<(), CliError> {
        // `!(k > 0)` also rejects NaN
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.existence.k > 0.0) {
            return Err(CliError::input(format!(
                "existence.k must be positive, got {}",
                self.existence.k
            )));
        }
        if self.existence.samples < 2 {
            return Err(CliError::input("existence.samples must be at least 2".into()));
        }
        Ok(())
    }
}
