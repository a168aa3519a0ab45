//! Bundled reference problems with closed-form solutions, and a backwards
//! manufactured-problem generator built on the fractional power rule.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::expr::parse;
use crate::gamma::gamma_pos;
use crate::num;
use crate::problem::{classify, ModelError, ProblemSpec};
use crate::quad::caputo_power_rule;

/// Sum of power terms `sum_i c_i t^{e_i}`, used for closed-form references.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSum(pub Vec<(f64, f64)>);

impl PowerSum {
    pub fn eval(&self, t: f64) -> f64 {
        self.0
            .iter()
            .map(|&(c, e)| {
                if e == 0.0 {
                    c
                } else {
                    c * num::pow(t, e)
                }
            })
            .sum()
    }
}

/// A problem with a known exact solution.
#[derive(Debug, Clone)]
pub struct ReferenceProblem {
    pub name: String,
    pub spec: ProblemSpec,
    /// True when the problem deliberately violates the theorems' hypotheses
    /// and must run through the forced reformulation.
    pub forced: bool,
    /// True when the forced run additionally needs fractional reconstruction.
    pub fractional_reconstruction: bool,
    pub exact_v: PowerSum,
    pub exact_u: PowerSum,
    /// `(order m, expected cm verdict)`.
    pub expected_smoothness: (usize, bool),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinId {
    Counterexample1,
    Counterexample2,
}

impl BuiltinId {
    pub const ALL: [BuiltinId; 2] = [BuiltinId::Counterexample1, BuiltinId::Counterexample2];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinId::Counterexample1 => "counterexample1",
            BuiltinId::Counterexample2 => "counterexample2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "counterexample1" => Some(BuiltinId::Counterexample1),
            "counterexample2" => Some(BuiltinId::Counterexample2),
            _ => None,
        }
    }
}

impl fmt::Display for BuiltinId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The two published counterexamples to the naive two-term equivalence
/// lemmas, with their closed-form solutions.
pub fn builtin(id: BuiltinId) -> ReferenceProblem {
    match id {
        BuiltinId::Counterexample1 => {
            let rhs = "gamma(1.6)/(2*gamma(1.4))*t^0.4 \
                       + (gamma(1.6)*gamma(1.8))^0.5/(2*gamma(1.4))*y1^0.5";
            let expr = parse(rhs, 1).expect("builtin rhs parses");
            let spec = ProblemSpec::new(vec![1.8, 2.2], vec![0.0, 0.0, 0.0], 1.0, expr)
                .expect("builtin spec is valid");
            let u_coeff = gamma_pos(1.6) / gamma_pos(3.6);
            ReferenceProblem {
                name: String::from("counterexample1"),
                spec,
                forced: true,
                fractional_reconstruction: false,
                exact_v: PowerSum(vec![(1.0, 0.6)]),
                exact_u: PowerSum(vec![(u_coeff, 2.6)]),
                expected_smoothness: (3, false),
            }
        }
        BuiltinId::Counterexample2 => {
            let rhs = "gamma(1.2)/(2*gamma(1.1))*(t^0.1 + y1^0.5)";
            let expr = parse(rhs, 1).expect("builtin rhs parses");
            let spec = ProblemSpec::new(vec![1.4, 1.5], vec![0.0, 0.0], 1.0, expr)
                .expect("builtin spec is valid");
            let u_coeff = gamma_pos(1.2) / gamma_pos(2.6);
            ReferenceProblem {
                name: String::from("counterexample2"),
                spec,
                forced: true,
                fractional_reconstruction: true,
                exact_v: PowerSum(vec![(1.0, 0.2)]),
                exact_u: PowerSum(vec![(u_coeff, 1.6)]),
                expected_smoothness: (2, false),
            }
        }
    }
}

/// The equation-side identity behind each builtin: substituting the exact `v`
/// into the right side of its integral equation must return `v` itself. The
/// inner/outer power-rule coefficient chain collapses to 1; returns the
/// worst deviation from the identity. Guards against corpus corruption.
pub fn builtin_algebra_check(id: BuiltinId) -> f64 {
    match id {
        BuiltinId::Counterexample1 => {
            // J^0.2 t^0.6 = G(1.6)/G(1.8) t^0.8; f(s, .) collapses to
            // G(1.6)/G(1.4) s^0.4; J^0.2 of that returns t^0.6
            let inner = gamma_pos(1.6) / gamma_pos(1.8);
            let a = gamma_pos(1.6) / (2.0 * gamma_pos(1.4));
            let b = num::sqrt(gamma_pos(1.6) * gamma_pos(1.8)) / (2.0 * gamma_pos(1.4));
            let f_coeff = a + b * num::sqrt(inner);
            let chain = f_coeff * gamma_pos(1.4) / gamma_pos(1.6);
            num::abs(chain - 1.0)
        }
        BuiltinId::Counterexample2 => {
            // f(s, s^0.2) = G(1.2)/G(1.1) s^0.1; J^0.1 of that returns t^0.2
            let c = gamma_pos(1.2) / (2.0 * gamma_pos(1.1));
            let chain = 2.0 * c * gamma_pos(1.1) / gamma_pos(1.2);
            num::abs(chain - 1.0)
        }
    }
}

/// Build a problem whose exact solution is `scale * t^mu` via the Caputo
/// power rule: the forcing term is the closed-form `D^{a_n}(scale t^mu)` and
/// each coupling `c_j` adds `c_j (y_j - D^{a_j}(scale t^mu))`.
///
/// Preconditions: `mu > a_n - 1` (all derivatives exist in closed form) and
/// `mu != a_n` (an integer `mu = a_n` makes the top derivative a constant,
/// which sits on the boundary of the power rule; the case is rejected).
pub fn manufacture(
    orders: &[f64],
    horizon: f64,
    mu: f64,
    scale: f64,
    couplings: &[f64],
) -> Result<ReferenceProblem, ModelError> {
    let n = orders.len();
    if n < 2 {
        return Err(ModelError::Invalid("need at least two orders".into()));
    }
    if couplings.len() != n - 1 {
        return Err(ModelError::Invalid(format!(
            "{} couplings required, got {}",
            n - 1,
            couplings.len()
        )));
    }
    let an = orders[n - 1];
    if !(mu > an - 1.0) {
        return Err(ModelError::Invalid(format!(
            "mu = {mu} must exceed a_n - 1 = {} for the power rule",
            an - 1.0
        )));
    }
    if mu == an {
        return Err(ModelError::Invalid(
            "mu = a_n leaves a constant top derivative on the power-rule boundary; \
             pick mu above or below a_n"
                .into(),
        ));
    }
    let mut rhs = String::new();
    let (fc, fe) = caputo_power_rule(mu, an).map_err(|e| ModelError::Invalid(format!("{e}")))?;
    if fc != 0.0 && scale != 0.0 {
        rhs.push_str(&format!("{}*t^{}", fc * scale, fe));
    }
    for (j, &c) in couplings.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let a = orders[j];
        let (dc, de) = if a == 0.0 {
            (1.0, mu)
        } else {
            caputo_power_rule(mu, a).map_err(|e| ModelError::Invalid(format!("{e}")))?
        };
        if !rhs.is_empty() {
            rhs.push_str(" + ");
        }
        rhs.push_str(&format!("{c}*(y{}", j + 1));
        if dc != 0.0 && scale != 0.0 {
            rhs.push_str(&format!(" - {}*t^{}", dc * scale, de));
        }
        rhs.push(')');
    }
    if rhs.is_empty() {
        rhs.push_str("0*y1");
    }
    let expr = parse(&rhs, n - 1).map_err(|e| ModelError::Invalid(format!("{e}")))?;

    let m_top = num::ceil_usize(an);
    let mut initials = vec![0.0; m_top];
    if num::is_integer(mu) && (mu as usize) < m_top {
        let mut fact = 1.0;
        for k in 2..=(mu as usize) {
            fact *= k as f64;
        }
        initials[mu as usize] = scale * fact;
    }
    let spec = ProblemSpec::new(orders.to_vec(), initials, horizon, expr)?;
    let forced = !classify(&spec).is_supported();
    let expected_order = m_top;
    // smooth iff t^mu has bounded m-th differences, i.e. mu integer or >= m
    let expected_smooth = num::is_integer(mu) || mu >= expected_order as f64;
    Ok(ReferenceProblem {
        name: format!("manufactured-mu{mu}"),
        spec,
        forced,
        fractional_reconstruction: false,
        exact_v: PowerSum(vec![]), // depends on the reformulation order; u is the reference
        exact_u: PowerSum(vec![(scale, mu)]),
        expected_smoothness: (expected_order, expected_smooth),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_parameters_match_published_counterexamples() {
        let p1 = builtin(BuiltinId::Counterexample1);
        assert_eq!(p1.spec.orders(), &[1.8, 2.2]);
        assert_eq!(p1.exact_v.0, vec![(1.0, 0.6)]);
        assert_eq!(p1.expected_smoothness, (3, false));
        assert!(p1.forced && !p1.fractional_reconstruction);

        let p2 = builtin(BuiltinId::Counterexample2);
        assert_eq!(p2.spec.orders(), &[1.4, 1.5]);
        assert_eq!(p2.exact_v.0, vec![(1.0, 0.2)]);
        assert_eq!(p2.expected_smoothness, (2, false));
        assert!(p2.forced && p2.fractional_reconstruction);
        assert_abs_diff_eq!(
            p2.exact_u.0[0].0,
            gamma(1.2).unwrap() / gamma(2.6).unwrap(),
            epsilon = 1e-15
        );
    }

    #[test]
    fn builtin_algebra_collapses_to_identity() {
        for id in BuiltinId::ALL {
            assert!(builtin_algebra_check(id) <= 1e-12, "{id}");
        }
    }

    #[test]
    fn manufacture_case_a_cubic() {
        let p = manufacture(&[0.4, 2.6], 1.0, 3.0, 1.0, &[1.0]).unwrap();
        assert!(!p.forced);
        // rhs evaluates as G(4)/G(1.4) t^0.4 + (y1 - G(4)/G(3.6) t^2.6)
        let c1 = gamma(4.0).unwrap() / gamma(1.4).unwrap();
        let c2 = gamma(4.0).unwrap() / gamma(3.6).unwrap();
        let got = p.spec.rhs().eval(0.7, &[0.3]).unwrap();
        let want = c1 * 0.7f64.powf(0.4) + 0.3 - c2 * 0.7f64.powf(2.6);
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        assert_eq!(p.spec.initial_values(), &[0.0, 0.0, 0.0]);
        assert_eq!(p.expected_smoothness, (3, true));
    }

    #[test]
    fn manufacture_annihilated_forcing() {
        // orders (1, 2.5), mu = 2, no couplings: D^2.5 t^2 = 0, so f = 0
        let p = manufacture(&[1.0, 2.5], 1.0, 2.0, 1.0, &[0.0]).unwrap();
        assert_eq!(p.spec.rhs().eval(0.5, &[9.0]).unwrap(), 0.0);
        // initial values read off t^2
        assert_eq!(p.spec.initial_values(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn manufacture_rejects_boundary() {
        assert!(manufacture(&[1.0, 3.0], 1.0, 3.0, 1.0, &[0.0]).is_err()); // mu = a_n
        assert!(manufacture(&[1.0, 2.5], 1.0, 1.2, 1.0, &[0.0]).is_err()); // mu <= a_n - 1
        assert!(manufacture(&[1.0, 2.5], 1.0, 2.0, 1.0, &[]).is_err()); // coupling count
    }
}
