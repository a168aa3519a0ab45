//! The initial value problem, its case classification, hypothesis checks, the
//! Volterra reformulation, reconstruction of `u` from `v`, and ODE residuals.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::GridError;
use crate::expr::{EvalError, Expression};
use crate::grid::{nth_divided_derivative, GridFunction, Samples};
use crate::num;
use crate::quad::{caputo_power_rule, rl_integral};

/// Default absolute tolerance for the exact-zero hypothesis checks.
pub const HYPOTHESIS_TOLERANCE: f64 = 1e-12;

/// The multi-term IVP: orders, initial values, horizon, and the parsed
/// right-hand side `f(t, y1, .., y_{n-1})`.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    orders: Vec<f64>,
    initial_values: Vec<f64>,
    horizon: f64,
    rhs: Expression,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    Invalid(String),
    Unsupported(String),
    Eval(EvalError),
    Grid(GridError),
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::Invalid(s) => write!(f, "invalid problem: {s}"),
            ModelError::Unsupported(s) => write!(f, "unsupported case: {s}"),
            ModelError::Eval(e) => write!(f, "{e}"),
            ModelError::Grid(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ModelError {}

impl ModelError {
    pub fn is_unsupported(&self) -> bool {
        matches!(self, ModelError::Unsupported(_))
    }
}

impl From<EvalError> for ModelError {
    fn from(e: EvalError) -> Self {
        ModelError::Eval(e)
    }
}

impl From<GridError> for ModelError {
    fn from(e: GridError) -> Self {
        ModelError::Grid(e)
    }
}

impl ProblemSpec {
    /// Validates: at least two strictly increasing orders with `a_1 >= 0`,
    /// exactly `ceil(a_n)` initial values, positive horizon, rhs arity `n-1`.
    /// A bare-`u` dependence is expressed by `a_1 = 0`.
    pub fn new(
        orders: Vec<f64>,
        initial_values: Vec<f64>,
        horizon: f64,
        rhs: Expression,
    ) -> Result<Self, ModelError> {
        if orders.len() < 2 {
            return Err(ModelError::Invalid(
                "need at least two orders (use a_1 = 0 for a bare-u term)".into(),
            ));
        }
        if !orders.iter().all(|a| a.is_finite()) || orders[0] < 0.0 {
            return Err(ModelError::Invalid("orders must be finite with a_1 >= 0".into()));
        }
        for w in orders.windows(2) {
            if !(w[1] > w[0]) {
                return Err(ModelError::Invalid(format!(
                    "orders must be strictly increasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        let a_n = *orders.last().unwrap();
        if !(a_n > 0.0) {
            return Err(ModelError::Invalid("highest order must be positive".into()));
        }
        let need = num::ceil_usize(a_n);
        if initial_values.len() != need {
            return Err(ModelError::Invalid(format!(
                "ceil(a_n) = {} initial values required, got {}",
                need,
                initial_values.len()
            )));
        }
        if !initial_values.iter().all(|v| v.is_finite()) {
            return Err(ModelError::Invalid("initial values must be finite".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(ModelError::Invalid(format!("horizon {horizon} must be positive")));
        }
        if rhs.arity() != orders.len() - 1 {
            return Err(ModelError::Invalid(format!(
                "rhs arity {} does not match n - 1 = {}",
                rhs.arity(),
                orders.len() - 1
            )));
        }
        Ok(Self { orders, initial_values, horizon, rhs })
    }

    pub fn orders(&self) -> &[f64] {
        &self.orders
    }

    pub fn initial_values(&self) -> &[f64] {
        &self.initial_values
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rhs(&self) -> &Expression {
        &self.rhs
    }

    pub fn highest_order(&self) -> f64 {
        *self.orders.last().unwrap()
    }

    pub fn second_highest_order(&self) -> f64 {
        self.orders[self.orders.len() - 2]
    }

    /// The Taylor polynomial from the initial values, evaluated at `t`.
    pub fn initial_polynomial(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut fact = 1.0;
        let mut tp = 1.0;
        for (i, &c) in self.initial_values.iter().enumerate() {
            if i > 0 {
                fact *= i as f64;
                tp *= t;
            }
            acc += c * tp / fact;
        }
        acc
    }
}

/// Which equivalence theorem covers the problem, if any.
#[derive(Debug, Clone, PartialEq)]
pub enum CaseTag {
    /// Both top orders non-integer, `ceil(a_{n-1}) + 1 < a_n`.
    CaseA,
    /// `a_{n-1}` integer, `a_n` non-integer, `a_{n-1} + 1 < a_n`.
    CaseB,
    /// `a_{n-1}` non-integer, `a_n` integer, `ceil(a_{n-1}) + 1 <= a_n`.
    CaseC,
    /// No theorem applies; the reason names the violated condition.
    Unsupported(String),
}

impl CaseTag {
    pub fn is_supported(&self) -> bool {
        !matches!(self, CaseTag::Unsupported(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            CaseTag::CaseA => "case-a",
            CaseTag::CaseB => "case-b",
            CaseTag::CaseC => "case-c",
            CaseTag::Unsupported(_) => "unsupported",
        }
    }
}

impl fmt::Display for CaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CaseTag::Unsupported(why) => write!(f, "unsupported: {why}"),
            other => f.write_str(other.name()),
        }
    }
}

/// Total, deterministic case classification.
pub fn classify(spec: &ProblemSpec) -> CaseTag {
    let am = spec.second_highest_order();
    let an = spec.highest_order();
    let am_int = num::is_integer(am);
    let an_int = num::is_integer(an);
    let am_ceil = num::ceil(am);
    match (am_int, an_int) {
        (false, false) => {
            if am_ceil + 1.0 < an {
                CaseTag::CaseA
            } else {
                CaseTag::Unsupported(format!(
                    "ceil(a_{{n-1}}) + 1 = {} is not < a_n = {}",
                    am_ceil + 1.0,
                    an
                ))
            }
        }
        (true, false) => {
            if am + 1.0 < an {
                CaseTag::CaseB
            } else {
                CaseTag::Unsupported(format!("a_{{n-1}} + 1 = {} is not < a_n = {}", am + 1.0, an))
            }
        }
        (false, true) => {
            if am_ceil + 1.0 <= an {
                CaseTag::CaseC
            } else {
                CaseTag::Unsupported(format!(
                    "ceil(a_{{n-1}}) + 1 = {} is not <= a_n = {}",
                    am_ceil + 1.0,
                    an
                ))
            }
        }
        (true, true) => CaseTag::Unsupported(format!(
            "both a_{{n-1}} = {am} and a_n = {an} are integers (classical case, no theorem applies)"
        )),
    }
}

/// One checked hypothesis with its measured witness value.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: String,
    pub satisfied: bool,
    pub measured: f64,
}

/// Every hypothesis of the classified case, plus any interpretation notes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub notes: Vec<String>,
}

impl HypothesisReport {
    pub fn all_satisfied(&self) -> bool {
        self.checks.iter().all(|c| c.satisfied)
    }
}

/// Check the classified case's hypotheses at absolute tolerance `tol`.
pub fn check_hypotheses(
    spec: &ProblemSpec,
    tag: &CaseTag,
    tol: f64,
) -> Result<HypothesisReport, ModelError> {
    let n_args = spec.orders.len() - 1;
    let mut report = HypothesisReport::default();
    match tag {
        CaseTag::Unsupported(why) => {
            return Err(ModelError::Unsupported(why.clone()));
        }
        CaseTag::CaseA => {
            let zeros = vec![0.0; n_args];
            let f0 = spec.rhs.eval(0.0, &zeros)?;
            report.checks.push(HypothesisCheck {
                name: "f(0, 0, ..., 0) = 0".into(),
                satisfied: num::abs(f0) <= tol,
                measured: f0,
            });
            let mc = num::ceil_usize(spec.second_highest_order());
            let u0m = spec.initial_values[mc];
            report.checks.push(HypothesisCheck {
                name: format!("u0^({mc}) = 0"),
                satisfied: num::abs(u0m) <= tol,
                measured: u0m,
            });
        }
        CaseTag::CaseB => {
            let am = spec.second_highest_order() as usize;
            let mut args = vec![0.0; n_args];
            args[n_args - 1] = spec.initial_values[am];
            let f0 = spec.rhs.eval(0.0, &args)?;
            report.checks.push(HypothesisCheck {
                name: format!("f(0, 0, ..., u0^({am})) = 0"),
                satisfied: num::abs(f0) <= tol,
                measured: f0,
            });
            if n_args > 1 {
                report.notes.push(
                    "multi-term reading: the last argument slot carries u0^(a_{n-1}); the \
                     remaining slots are taken as zero"
                        .into(),
                );
            }
        }
        CaseTag::CaseC => {
            // continuity is assumed; we only check that f evaluates on a
            // sample lattice over [0, I] x {-1, 0, 1}^(n-1)
            let mut worst = 0.0f64;
            let mut ok = true;
            let mut first_failure = None;
            let samples = 33;
            let mut args = vec![0.0; n_args];
            for i in 0..samples {
                let t = spec.horizon * i as f64 / (samples - 1) as f64;
                for pattern in 0..3usize.pow(n_args as u32) {
                    let mut p = pattern;
                    for a in args.iter_mut() {
                        *a = (p % 3) as f64 - 1.0;
                        p /= 3;
                    }
                    match spec.rhs.eval(t, &args) {
                        Ok(v) => worst = worst.max(num::abs(v)),
                        Err(e) => {
                            ok = false;
                            if first_failure.is_none() {
                                first_failure = Some(e);
                            }
                        }
                    }
                }
            }
            report.checks.push(HypothesisCheck {
                name: "f evaluates on a sample lattice (continuity assumed)".into(),
                satisfied: ok,
                measured: worst,
            });
            if let Some(e) = first_failure {
                report.notes.push(format!("first failing evaluation: {e}"));
            }
        }
    }
    Ok(report)
}

/// How the reformulation was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReformShape {
    CaseA,
    CaseB,
    CaseC,
    /// Forced through the ceil-order substitution without the gap condition.
    ForcedCeil,
    /// Forced fractional reconstruction (equal-ceiling orders).
    ForcedFractional,
}

impl ReformShape {
    pub fn is_forced(self) -> bool {
        matches!(self, ReformShape::ForcedCeil | ReformShape::ForcedFractional)
    }

    pub fn name(self) -> &'static str {
        match self {
            ReformShape::CaseA => "case-a",
            ReformShape::CaseB => "case-b",
            ReformShape::CaseC => "case-c",
            ReformShape::ForcedCeil => "forced-ceil",
            ReformShape::ForcedFractional => "forced-fractional",
        }
    }
}

/// The equivalent Volterra equation
/// `v(t) = P(t) + J^beta f(., J^{gamma_1} v, .., J^{gamma_{n-1}} v)(t)`,
/// with `u` recovered as the initial polynomial plus `J^m v`.
#[derive(Debug, Clone)]
pub struct VolterraProblem {
    shape: ReformShape,
    /// Reconstruction order `m`; fractional only for forced fractional shape.
    reconstruction_order: f64,
    /// Outer kernel exponent `beta = a_n - m > 0`.
    outer_order: f64,
    /// Inner orders `gamma_j = m - a_j`; zero means the argument is `v` itself.
    inner_orders: Vec<f64>,
    /// Coefficients of `P`: `u0^(i+m) / i!` for `i = 0 .. ceil(a_n)-m-1`.
    forcing_coeffs: Vec<f64>,
    /// `u0^(0) .. u0^(ceil(m)-1)`, for reconstruction.
    lower_initials: Vec<f64>,
    horizon: f64,
    rhs: Expression,
}

impl VolterraProblem {
    pub fn shape(&self) -> ReformShape {
        self.shape
    }

    /// True when a theorem guarantees the equivalence (not a forced run).
    pub fn guaranteed(&self) -> bool {
        !self.shape.is_forced()
    }

    pub fn reconstruction_order(&self) -> f64 {
        self.reconstruction_order
    }

    pub fn outer_order(&self) -> f64 {
        self.outer_order
    }

    pub fn inner_orders(&self) -> &[f64] {
        &self.inner_orders
    }

    pub fn forcing_coeffs(&self) -> &[f64] {
        &self.forcing_coeffs
    }

    pub fn lower_initials(&self) -> &[f64] {
        &self.lower_initials
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rhs(&self) -> &Expression {
        &self.rhs
    }

    /// `P(t)`, the forcing polynomial.
    pub fn forcing_polynomial(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut tp = 1.0;
        for (i, &c) in self.forcing_coeffs.iter().enumerate() {
            if i > 0 {
                tp *= t;
            }
            acc += c * tp;
        }
        acc
    }
}

fn build_volterra(spec: &ProblemSpec, shape: ReformShape, m: f64) -> VolterraProblem {
    let an = spec.highest_order();
    let beta = an - m;
    let inner_orders: Vec<f64> =
        spec.orders[..spec.orders.len() - 1].iter().map(|a| m - a).collect();
    let forcing_coeffs = if num::is_integer(m) {
        let m_us = m as usize;
        let top = num::ceil_usize(an);
        let mut fact = 1.0;
        (0..top.saturating_sub(m_us))
            .map(|i| {
                if i > 0 {
                    fact *= i as f64;
                }
                spec.initial_values[i + m_us] / fact
            })
            .collect()
    } else {
        // fractional reconstruction: the refuted-lemma equation carries no
        // polynomial term
        Vec::new()
    };
    let lower_initials = spec.initial_values[..num::ceil_usize(m)].to_vec();
    VolterraProblem {
        shape,
        reconstruction_order: m,
        outer_order: beta,
        inner_orders,
        forcing_coeffs,
        lower_initials,
        horizon: spec.horizon,
        rhs: spec.rhs.clone(),
    }
}

/// Reformulate a supported problem; `Unsupported` tags are rejected.
pub fn reformulate(spec: &ProblemSpec, tag: &CaseTag) -> Result<VolterraProblem, ModelError> {
    let am = spec.second_highest_order();
    match tag {
        CaseTag::CaseA => Ok(build_volterra(spec, ReformShape::CaseA, num::ceil(am))),
        CaseTag::CaseB => Ok(build_volterra(spec, ReformShape::CaseB, am)),
        CaseTag::CaseC => Ok(build_volterra(spec, ReformShape::CaseC, num::ceil(am))),
        CaseTag::Unsupported(why) => Err(ModelError::Unsupported(why.clone())),
    }
}

/// Reformulate outside the theorems' hypotheses. The result carries no
/// equivalence guarantee; fractional reconstruction (needed when the two top
/// orders share a ceiling) must be enabled explicitly.
pub fn reformulate_forced(
    spec: &ProblemSpec,
    allow_fractional: bool,
) -> Result<VolterraProblem, ModelError> {
    let am = spec.second_highest_order();
    let an = spec.highest_order();
    if num::is_integer(am) {
        return Ok(build_volterra(spec, ReformShape::ForcedCeil, am));
    }
    if num::ceil(am) < num::ceil(an) || num::is_integer(an) {
        return Ok(build_volterra(spec, ReformShape::ForcedCeil, num::ceil(am)));
    }
    if !allow_fractional {
        return Err(ModelError::Unsupported(format!(
            "orders {am} and {an} share a ceiling; forced reformulation needs \
             fractional reconstruction enabled"
        )));
    }
    Ok(build_volterra(spec, ReformShape::ForcedFractional, am))
}

/// `u = sum_{i < ceil(m)} t^i/i! u0^(i) + J^m v`.
pub fn reconstruct_u(v: &GridFunction, vp: &VolterraProblem) -> Result<GridFunction, ModelError> {
    let m = vp.reconstruction_order;
    let j = if m == 0.0 {
        v.clone()
    } else {
        rl_integral(v, m).map_err(|e| ModelError::Invalid(format!("{e}")))?
    };
    let t = v.grid().nodes();
    let mut out = j.values().to_vec();
    let mut fact = 1.0;
    for (i, &c) in vp.lower_initials.iter().enumerate() {
        if i > 0 {
            fact *= i as f64;
        }
        if c != 0.0 {
            for (slot, &tt) in out.iter_mut().zip(t) {
                *slot += c * num::pow(tt, i as f64) / fact;
            }
        }
    }
    GridFunction::new(v.grid().clone(), out).map_err(ModelError::Grid)
}

/// ODE residual `D^{a_n} u - f(t, D^{a_1} u, ..)` at nodes `>= epsilon`.
///
/// The initial-value Taylor polynomial is subtracted before differencing and
/// its Caputo derivatives are added back in closed form; divided differences
/// of the polynomial part would otherwise drown in rounding noise near 0.
pub fn residual(
    u: &GridFunction,
    spec: &ProblemSpec,
    epsilon: f64,
) -> Result<Samples, ModelError> {
    let grid = u.grid();
    let t = grid.nodes();
    let frac = {
        let vals: Vec<f64> =
            t.iter().zip(u.values()).map(|(&tt, &v)| v - spec.initial_polynomial(tt)).collect();
        GridFunction::new(grid.clone(), vals).map_err(ModelError::Grid)?
    };
    let start = grid.first_node_at_or_after(epsilon);
    let times = t[start..].to_vec();

    let mut derivatives: Vec<Vec<f64>> = Vec::with_capacity(spec.orders.len());
    for &a in &spec.orders {
        let mut d: Vec<f64> = if a == 0.0 {
            frac.values()[start..].to_vec()
        } else {
            let m = num::ceil_usize(a);
            let w = nth_divided_derivative(&frac, m).map_err(ModelError::Grid)?;
            let full = if (m as f64) == a {
                w
            } else {
                rl_integral(&w, m as f64 - a).map_err(|e| ModelError::Invalid(format!("{e}")))?
            };
            full.values()[start..].to_vec()
        };
        // closed-form Caputo of the Taylor part
        let mut fact = 1.0;
        for (i, &c) in spec.initial_values.iter().enumerate() {
            if i > 0 {
                fact *= i as f64;
            }
            if c == 0.0 {
                continue;
            }
            let (coeff, exp) = if a == 0.0 {
                (1.0, i as f64)
            } else {
                caputo_power_rule(i as f64, a)
                    .map_err(|e| ModelError::Invalid(format!("{e}")))?
            };
            if coeff != 0.0 {
                for (slot, &tt) in d.iter_mut().zip(&times) {
                    *slot += c / fact * coeff * num::pow(tt, exp);
                }
            }
        }
        derivatives.push(d);
    }

    let n_args = spec.orders.len() - 1;
    let mut args = vec![0.0; n_args];
    let mut values = Vec::with_capacity(times.len());
    for (row, &tt) in times.iter().enumerate() {
        for (k, slot) in args.iter_mut().enumerate() {
            *slot = derivatives[k][row];
        }
        let f = spec.rhs.eval(tt, &args)?;
        values.push(derivatives[n_args][row] - f);
    }
    Ok(Samples { times, values })
}
