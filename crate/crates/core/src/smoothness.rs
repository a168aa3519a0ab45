//! Regularity diagnostics: the `g(0) = 0` differentiability criterion and a
//! singular-exponent estimator for divided differences near the origin.
//!
//! "u is m times continuously differentiable" is not decidable from samples;
//! it is operationalized as "the m-th divided differences do not diverge as
//! t -> 0 at the fitted power rate". Window and margin are configurable and
//! reported.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::GridError;
use crate::expr::EvalError;
use crate::grid::{nth_divided_derivative, GridFunction};
use crate::num;
use crate::problem::ProblemSpec;

/// Default fit window: graded-grid nodes 2..=32.
pub const DEFAULT_WINDOW: (usize, usize) = (2, 32);
/// Default slack on the fitted exponent when deciding the verdict.
pub const DEFAULT_EXPONENT_MARGIN: f64 = 0.1;
/// Default tolerance for the `g(0) = 0` witness.
pub const DEFAULT_C1_TOLERANCE: f64 = 1e-12;

/// Divided differences below this (relative to the data scale) count as
/// vanishing rather than as a measurable power.
const DEGENERATE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SmoothnessError {
    /// Fit window too small after clamping to the grid.
    WindowTooSmall { have: usize, need: usize },
    BadOrder(f64),
    Grid(GridError),
    Eval(EvalError),
}

impl fmt::Display for SmoothnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothnessError::WindowTooSmall { have, need } => {
                write!(f, "fit window has {have} nodes, needs {need}")
            }
            SmoothnessError::BadOrder(b) => write!(f, "order {b} outside (0, 1)"),
            SmoothnessError::Grid(e) => write!(f, "{e}"),
            SmoothnessError::Eval(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for SmoothnessError {}

impl From<GridError> for SmoothnessError {
    fn from(e: GridError) -> Self {
        SmoothnessError::Grid(e)
    }
}

/// The `F(t) = int_0^t (t-s)^{-beta} g(s) ds` differentiability test:
/// `F` is continuously differentiable on `[0, I]` iff `g(0) = 0`.
/// Returns `(verdict, witness)` with `witness = g(0)`.
pub fn c1_criterion(
    g: &GridFunction,
    beta: f64,
    tolerance: f64,
) -> Result<(bool, f64), SmoothnessError> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(SmoothnessError::BadOrder(beta));
    }
    let witness = g.values()[0];
    Ok((num::abs(witness) <= tolerance, witness))
}

/// Least-squares slope of `log |d_m u(t_j)|` against `log t_j` over the node
/// window, where `d_m` is the m-th divided difference. Returns
/// `(exponent, stderr)`; a vanishing difference pattern returns
/// `(+infinity, 0)` meaning "the m-th derivative vanishes near 0".
pub fn singular_exponent(
    u: &GridFunction,
    m: usize,
    window: (usize, usize),
) -> Result<(f64, f64), SmoothnessError> {
    let d = nth_divided_derivative(u, m)?;
    let n = u.len();
    let lo = window.0.max(1);
    let hi = window.1.min(n - 2);
    if hi < lo || hi - lo + 1 < 4 {
        return Err(SmoothnessError::WindowTooSmall {
            have: if hi < lo { 0 } else { hi - lo + 1 },
            need: 4,
        });
    }
    let t = u.grid().nodes();
    let scale = 1.0 + u.sup_norm();
    let window_max = d.values()[lo..=hi].iter().fold(0.0f64, |a, v| a.max(num::abs(*v)));
    if window_max <= DEGENERATE_FLOOR * scale {
        return Ok((f64::INFINITY, 0.0));
    }
    let mut xs = Vec::with_capacity(hi - lo + 1);
    let mut ys = Vec::with_capacity(hi - lo + 1);
    for (&tj, &dj) in t[lo..=hi].iter().zip(&d.values()[lo..=hi]) {
        let dv = num::abs(dj);
        if dv > 0.0 {
            xs.push(num::ln(tj));
            ys.push(num::ln(dv));
        }
    }
    if xs.len() < 4 {
        return Ok((f64::INFINITY, 0.0));
    }
    let count = xs.len() as f64;
    let mean_x: f64 = xs.iter().sum::<f64>() / count;
    let mean_y: f64 = ys.iter().sum::<f64>() / count;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    let slope = sxy / sxx;
    let mut sse = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let fit = mean_y + slope * (x - mean_x);
        sse += (y - fit) * (y - fit);
    }
    let stderr = num::sqrt(sse / (count - 2.0) / sxx);
    Ok((slope, stderr))
}

/// Aggregated regularity verdicts for one solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothnessReport {
    /// The order whose continuity is being probed (`ceil(a_n)`).
    pub target_order: usize,
    /// `g(0)` for the relevant integrand `g(s) = f(s, D^{a_1}u(0+), ...)`.
    pub g_at_zero: f64,
    pub c1_verdict: bool,
    /// Fitted power of the m-th divided differences near 0; `+inf` when they
    /// vanish.
    pub singular_exponent: f64,
    pub exponent_stderr: f64,
    /// True when the differences do not diverge at the fitted rate.
    pub cm_verdict: bool,
    pub window: (usize, usize),
    pub exponent_margin: f64,
}

impl SmoothnessReport {
    /// Human-readable one-line verdict.
    pub fn summary(&self) -> String {
        if self.cm_verdict {
            format!("consistent with u in C^{}", self.target_order)
        } else {
            format!(
                "u is not C^{}: divided differences diverge like t^{:.3}",
                self.target_order, self.singular_exponent
            )
        }
    }
}

/// Run the exponent estimator at `m = ceil(a_n)` and the `g(0)` criterion on
/// the reformulation integrand. The integrand limit at 0 is evaluated in
/// closed form: `D^{a_j} u(0+)` vanishes for non-integer `a_j` and equals the
/// matching initial value for integer `a_j`.
pub fn smoothness_report(
    u: &GridFunction,
    spec: &ProblemSpec,
    window: (usize, usize),
    exponent_margin: f64,
) -> Result<SmoothnessReport, SmoothnessError> {
    let m = num::ceil_usize(spec.highest_order());
    let (exponent, stderr) = singular_exponent(u, m, window)?;
    let args: Vec<f64> = spec.orders()[..spec.orders().len() - 1]
        .iter()
        .map(|&a| {
            if num::is_integer(a) {
                spec.initial_values()[a as usize]
            } else {
                0.0
            }
        })
        .collect();
    let g0 = spec.rhs().eval(0.0, &args).map_err(SmoothnessError::Eval)?;
    let cm_verdict = exponent.is_infinite() || exponent >= -exponent_margin;
    Ok(SmoothnessReport {
        target_order: m,
        g_at_zero: g0,
        c1_verdict: num::abs(g0) <= DEFAULT_C1_TOLERANCE,
        singular_exponent: exponent,
        exponent_stderr: stderr,
        cm_verdict,
        window,
        exponent_margin,
    })
}
