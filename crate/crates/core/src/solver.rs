//! Picard and node-by-node solvers for the discretized Volterra equation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::EvalError;
use crate::gamma::gamma_pos;
use crate::grid::{Grid, GridFunction};
use crate::problem::{
    check_hypotheses, classify, reconstruct_u, reformulate, reformulate_forced, CaseTag,
    HypothesisReport, ModelError, ProblemSpec, VolterraProblem, HYPOTHESIS_TOLERANCE,
};
use crate::quad::{quad_weights, QuadWeights};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverMode {
    #[default]
    Picard,
    StepWise,
}

impl SolverMode {
    pub fn name(self) -> &'static str {
        match self {
            SolverMode::Picard => "picard",
            SolverMode::StepWise => "stepwise",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Sup-norm stopping threshold for successive updates.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Damping for the per-node fixed point in stepwise mode, in (0, 1].
    pub damping: f64,
    pub mode: SolverMode,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tolerance: 1e-8, max_iterations: 200, damping: 0.5, mode: SolverMode::Picard }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<(), SolveError> {
        if !(self.tolerance > 0.0) || self.max_iterations < 1 {
            return Err(SolveError::BadConfig(alloc::format!(
                "tolerance {} / max_iterations {}",
                self.tolerance,
                self.max_iterations
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(SolveError::BadConfig(alloc::format!("damping {}", self.damping)));
        }
        Ok(())
    }
}

/// Per-iteration progress; non-convergence is reported here, not as an error.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceLog {
    /// Sup-norm update per Picard sweep, or per node in stepwise mode.
    pub sup_updates: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `sup |v - T_h(v)|` for the returned iterate.
    pub equation_residual: f64,
    /// Largest `sup |v^(k) - P|` over all iterates (final `v` for the
    /// stepwise solver); the computational shadow of the fixed-point ball.
    pub max_deviation_from_forcing: f64,
    /// Set when a non-finite rhs value at t = 0 was replaced by constant
    /// extrapolation from the first interior node (integrably singular
    /// forcing).
    pub origin_regularized: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    BadConfig(String),
    /// Expression failed at a grid node.
    EvalAt { node: usize, error: EvalError },
    /// Stepwise inner fixed point failed to settle at a node.
    NodeDiverged { node: usize },
    /// Non-finite rhs value away from the origin.
    NonFiniteRhs { node: usize },
    Model(ModelError),
    /// Hypotheses violated and `force` not set.
    HypothesesViolated(HypothesisReport),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::BadConfig(s) => write!(f, "invalid solver config: {s}"),
            SolveError::EvalAt { node, error } => write!(f, "rhs at node {node}: {error}"),
            SolveError::NodeDiverged { node } => {
                write!(f, "per-node iteration did not converge at node {node}")
            }
            SolveError::NonFiniteRhs { node } => {
                write!(f, "rhs is not finite at interior node {node}")
            }
            SolveError::Model(e) => write!(f, "{e}"),
            SolveError::HypothesesViolated(r) => {
                let failed: Vec<&str> = r
                    .checks
                    .iter()
                    .filter(|c| !c.satisfied)
                    .map(|c| c.name.as_str())
                    .collect();
                write!(f, "hypotheses violated: {}", failed.join("; "))
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SolveError {}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        SolveError::Model(e)
    }
}

/// Precomputed weight tables for one (problem, grid) pair.
struct Discretization<'a> {
    vp: &'a VolterraProblem,
    grid: &'a Grid,
    outer: QuadWeights,
    outer_gamma: f64,
    /// One table per inner order; `None` when the order is 0 (identity).
    inner: Vec<Option<(QuadWeights, f64)>>,
    forcing: Vec<f64>,
}

impl<'a> Discretization<'a> {
    fn new(vp: &'a VolterraProblem, grid: &'a Grid) -> Result<Self, SolveError> {
        let outer = quad_weights(vp.outer_order(), grid)
            .map_err(|e| SolveError::BadConfig(alloc::format!("{e}")))?;
        let outer_gamma = gamma_pos(vp.outer_order());
        let mut inner = Vec::with_capacity(vp.inner_orders().len());
        for &g in vp.inner_orders() {
            if g == 0.0 {
                inner.push(None);
            } else {
                let w = quad_weights(g, grid)
                    .map_err(|e| SolveError::BadConfig(alloc::format!("{e}")))?;
                inner.push(Some((w, gamma_pos(g))));
            }
        }
        let forcing = grid.nodes().iter().map(|&t| vp.forcing_polynomial(t)).collect();
        Ok(Self { vp, grid, outer, outer_gamma, inner, forcing })
    }

    /// Inner arguments `J^{gamma_j} v (t_i)` for all j at one node.
    fn inner_args(&self, v: &[f64], i: usize, out: &mut [f64]) {
        for (slot, table) in out.iter_mut().zip(&self.inner) {
            *slot = match table {
                None => v[i],
                Some((w, g)) => dot(w.row(i), &v[..=i]) / g,
            };
        }
    }

    /// Sample `F_i = f(t_i, args(t_i))` for the current iterate. A non-finite
    /// or undefined value at t = 0 is replaced by the value at the first
    /// node (constant extrapolation over the first cell); anywhere else it is
    /// an error.
    fn sample_rhs(
        &self,
        v: &[f64],
        regularized: &mut bool,
    ) -> Result<Vec<f64>, SolveError> {
        let t = self.grid.nodes();
        let n = t.len();
        let k = self.vp.inner_orders().len();
        let mut args = vec![0.0; k];
        let mut out = vec![0.0; n];
        let mut origin_failed = false;
        for i in 0..n {
            self.inner_args(v, i, &mut args);
            match self.vp.rhs().eval(t[i], &args) {
                Ok(val) if val.is_finite() => out[i] = val,
                Ok(_) | Err(_) if i == 0 => {
                    origin_failed = true;
                }
                Ok(_) => return Err(SolveError::NonFiniteRhs { node: i }),
                Err(error) => return Err(SolveError::EvalAt { node: i, error }),
            }
        }
        if origin_failed {
            out[0] = out[1];
            *regularized = true;
        }
        Ok(out)
    }

    /// One application of the discretized operator `T_h`.
    fn apply(&self, v: &[f64], regularized: &mut bool) -> Result<Vec<f64>, SolveError> {
        let f = self.sample_rhs(v, regularized)?;
        let n = v.len();
        let mut out = self.forcing.clone();
        for (i, slot) in out.iter_mut().enumerate().skip(1) {
            *slot += dot(self.outer.row(i), &f[..=i]) / self.outer_gamma;
        }
        debug_assert_eq!(out.len(), n);
        Ok(out)
    }
}

#[inline]
fn dot(w: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in w.iter().zip(v) {
        acc += a * b;
    }
    acc
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

/// Global Picard iteration `v <- T_h(v)` from `v = P`, stopping when the
/// sup-norm update drops to `cfg.tolerance`.
pub fn picard_solve(
    vp: &VolterraProblem,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<(GridFunction, ConvergenceLog), SolveError> {
    cfg.validate()?;
    let disc = Discretization::new(vp, grid)?;
    let mut log = ConvergenceLog::default();
    let mut v = disc.forcing.clone();
    for _ in 0..cfg.max_iterations {
        let next = disc.apply(&v, &mut log.origin_regularized)?;
        let update = sup_diff(&next, &v);
        log.sup_updates.push(update);
        log.iterations += 1;
        v = next;
        log.max_deviation_from_forcing =
            log.max_deviation_from_forcing.max(sup_diff(&v, &disc.forcing));
        if update <= cfg.tolerance {
            log.converged = true;
            break;
        }
    }
    let t_v = disc.apply(&v, &mut log.origin_regularized)?;
    log.equation_residual = sup_diff(&t_v, &v);
    Ok((GridFunction::new(grid.clone(), v).map_err(ModelError::Grid)?, log))
}

/// Sequential node-by-node solve: at `t_i` the only unknown is `v_i` inside
/// the diagonal quadrature weight, settled by a damped fixed point started
/// from `v_{i-1}`.
pub fn step_solve(
    vp: &VolterraProblem,
    grid: &Grid,
    cfg: &SolverConfig,
) -> Result<(GridFunction, ConvergenceLog), SolveError> {
    cfg.validate()?;
    let disc = Discretization::new(vp, grid)?;
    let t = grid.nodes();
    let n = t.len();
    let k = vp.inner_orders().len();
    let mut log = ConvergenceLog::default();
    let mut v = vec![0.0; n];
    let mut f = vec![0.0; n];
    v[0] = disc.forcing[0];
    let mut args = vec![0.0; k];
    disc.inner_args(&v, 0, &mut args);
    let mut origin_pending = false;
    match vp.rhs().eval(t[0], &args) {
        Ok(val) if val.is_finite() => f[0] = val,
        _ => origin_pending = true, // fixed once node 1 is known
    }
    let mut fixed = vec![0.0; k]; // history part of each inner argument
    let mut diag = vec![0.0; k]; // diagonal coefficient of each inner argument
    for i in 1..n {
        loop {
            let mut known = disc.forcing[i];
            known += dot(&disc.outer.row(i)[..i], &f[..i]) / disc.outer_gamma;
            let w_diag = disc.outer.row(i)[i] / disc.outer_gamma;
            for (j, table) in disc.inner.iter().enumerate() {
                match table {
                    None => {
                        fixed[j] = 0.0;
                        diag[j] = 1.0;
                    }
                    Some((w, g)) => {
                        fixed[j] = dot(&w.row(i)[..i], &v[..i]) / g;
                        diag[j] = w.row(i)[i] / g;
                    }
                }
            }
            let mut x = v[i - 1];
            let mut settled = false;
            let mut last_update = 0.0;
            let mut fx = 0.0;
            for _ in 0..cfg.max_iterations {
                for j in 0..k {
                    args[j] = fixed[j] + diag[j] * x;
                }
                fx = match vp.rhs().eval(t[i], &args) {
                    Ok(val) if val.is_finite() => val,
                    Ok(_) => return Err(SolveError::NonFiniteRhs { node: i }),
                    Err(error) => return Err(SolveError::EvalAt { node: i, error }),
                };
                let next = (1.0 - cfg.damping) * x + cfg.damping * (known + w_diag * fx);
                last_update = (next - x).abs();
                x = next;
                if last_update <= cfg.tolerance {
                    settled = true;
                    break;
                }
            }
            if !settled {
                return Err(SolveError::NodeDiverged { node: i });
            }
            v[i] = x;
            f[i] = fx;
            if origin_pending && i == 1 {
                // patch the origin by constant extrapolation, then redo node 1
                // so both solvers discretize the same equation
                f[0] = f[1];
                log.origin_regularized = true;
                origin_pending = false;
                continue;
            }
            log.sup_updates.push(last_update);
            break;
        }
    }
    log.iterations = n - 1;
    log.converged = true;
    log.max_deviation_from_forcing = sup_diff(&v, &disc.forcing);
    let t_v = disc.apply(&v, &mut log.origin_regularized)?;
    log.equation_residual = sup_diff(&t_v, &v);
    Ok((GridFunction::new(grid.clone(), v).map_err(ModelError::Grid)?, log))
}

/// How `solve_ivp` treats problems outside the theorems' hypotheses.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolveOptions {
    /// Proceed on unsupported classification or violated hypotheses; the
    /// output then carries no equivalence guarantee.
    pub force: bool,
    /// Allow the fractional-reconstruction shape (equal-ceiling orders);
    /// only meaningful together with `force`.
    pub fractional_reconstruction: bool,
}

/// Everything a solve produces.
#[derive(Debug, Clone)]
pub struct Solution {
    pub tag: CaseTag,
    pub hypotheses: Option<HypothesisReport>,
    pub vp: VolterraProblem,
    pub v: GridFunction,
    pub u: GridFunction,
    pub log: ConvergenceLog,
}

/// Classify, check, reformulate, solve, and reconstruct.
pub fn solve_ivp(
    spec: &ProblemSpec,
    grid: &Grid,
    cfg: &SolverConfig,
    opts: &SolveOptions,
) -> Result<Solution, SolveError> {
    let tag = classify(spec);
    let (vp, hypotheses) = match &tag {
        CaseTag::Unsupported(why) => {
            if !opts.force {
                return Err(SolveError::Model(ModelError::Unsupported(why.clone())));
            }
            (reformulate_forced(spec, opts.fractional_reconstruction)?, None)
        }
        supported => {
            let report = check_hypotheses(spec, supported, HYPOTHESIS_TOLERANCE)?;
            if !report.all_satisfied() && !opts.force {
                return Err(SolveError::HypothesesViolated(report));
            }
            (reformulate(spec, supported)?, Some(report))
        }
    };
    let (v, log) = match cfg.mode {
        SolverMode::Picard => picard_solve(&vp, grid, cfg)?,
        SolverMode::StepWise => step_solve(&vp, grid, cfg)?,
    };
    let u = reconstruct_u(&v, &vp)?;
    Ok(Solution { tag, hypotheses, vp, v, u, log })
}
