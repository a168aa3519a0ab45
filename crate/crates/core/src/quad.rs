//! Riemann–Liouville integrals, Caputo derivatives, and the product-trapezoid
//! quadrature behind them.
//!
//! The weight table integrates the weakly singular kernel exactly against a
//! piecewise-linear interpolant, so `J^delta` is exact for piecewise-linear
//! data even for `delta < 1`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{DomainError, GridError};
use crate::gamma::gamma_pos;
use crate::grid::{nth_divided_derivative, Grid, GridFunction, Samples};
use crate::num;

/// Lower-triangular product-trapezoid weights for one kernel exponent.
///
/// Row `i` satisfies `sum_j w[i][j] phi(t_j) = int_0^{t_i} (t_i - s)^{beta-1} phi(s) ds`
/// exactly for piecewise-linear `phi`.
#[derive(Debug, Clone)]
pub struct QuadWeights {
    beta: f64,
    rows: Vec<Vec<f64>>,
}

impl QuadWeights {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Weights for the integral up to node `i` (`i + 1` entries; row 0 is `[0]`).
    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Build the weight table for kernel `(t - s)^{beta - 1}` on `grid`.
pub fn quad_weights(beta: f64, grid: &Grid) -> Result<QuadWeights, DomainError> {
    if !(beta > 0.0) {
        return Err(DomainError { op: "quad_weights", arg: beta });
    }
    let t = grid.nodes();
    let n = t.len();
    let mut rows = Vec::with_capacity(n);
    rows.push(vec![0.0]);
    for i in 1..n {
        let mut row = vec![0.0; i + 1];
        let ti = t[i];
        for j in 0..i {
            // cell [t_j, t_{j+1}]; substitute sigma = t_i - s
            let a = ti - t[j];
            let b = ti - t[j + 1];
            let h = t[j + 1] - t[j];
            let i0 = (num::pow(a, beta) - num::pow(b, beta)) / beta;
            let i1 = a * i0 - (num::pow(a, beta + 1.0) - num::pow(b, beta + 1.0)) / (beta + 1.0);
            row[j] += i0 - i1 / h;
            row[j + 1] += i1 / h;
        }
        rows.push(row);
    }
    Ok(QuadWeights { beta, rows })
}

/// `J^delta f` on the grid of `f`; `J^0` is the identity.
pub fn rl_integral(f: &GridFunction, delta: f64) -> Result<GridFunction, DomainError> {
    if delta == 0.0 {
        return Ok(f.clone());
    }
    let w = quad_weights(delta, f.grid())?;
    Ok(rl_integral_with(f.values(), f.grid(), &w))
}

/// `J^delta` with a prebuilt weight table (the solver reuses tables across
/// iterations).
pub(crate) fn rl_integral_with(values: &[f64], grid: &Grid, w: &QuadWeights) -> GridFunction {
    let g = gamma_pos(w.beta());
    let mut out = vec![0.0; values.len()];
    for (i, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = dot(w.row(i), &values[..=i]) / g;
    }
    GridFunction::from_raw(grid.clone(), out)
}

#[inline]
fn dot(w: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in w.iter().zip(v) {
        acc += a * b;
    }
    acc
}

/// `J^delta t^mu = c t^e`: returns `(c, e) = (Gamma(mu+1)/Gamma(mu+1+delta), mu + delta)`.
pub fn rl_power_rule(delta: f64, mu: f64) -> Result<(f64, f64), DomainError> {
    if !(mu > -1.0) {
        return Err(DomainError { op: "rl_power_rule", arg: mu });
    }
    if !(delta >= 0.0) {
        return Err(DomainError { op: "rl_power_rule", arg: delta });
    }
    if delta == 0.0 {
        return Ok((1.0, mu));
    }
    Ok((gamma_pos(mu + 1.0) / gamma_pos(mu + 1.0 + delta), mu + delta))
}

/// Caputo `D^beta t^mu` for `mu > beta - 1`: `(c, e)` with the annihilation
/// branch `D^beta t^mu = 0` when `mu` is an integer below `ceil(beta)`.
pub fn caputo_power_rule(mu: f64, beta: f64) -> Result<(f64, f64), DomainError> {
    if !(beta >= 0.0) {
        return Err(DomainError { op: "caputo_power_rule", arg: beta });
    }
    if !(mu >= 0.0) {
        return Err(DomainError { op: "caputo_power_rule", arg: mu });
    }
    if beta == 0.0 {
        return Ok((1.0, mu));
    }
    // an integer power below ceil(beta) has a vanishing classical derivative
    // of that order, so the Caputo derivative is zero outright
    if num::is_integer(mu) && mu < num::ceil(beta) {
        return Ok((0.0, 0.0));
    }
    if !(mu > beta - 1.0) {
        return Err(DomainError { op: "caputo_power_rule", arg: mu });
    }
    Ok((gamma_pos(mu + 1.0) / gamma_pos(mu + 1.0 - beta), mu - beta))
}

/// Caputo derivative `D^beta u = J^{ceil(beta)-beta} u^(ceil(beta))` by Newton
/// divided differences plus the RL integral. Values are reported only at nodes
/// `>= epsilon`; near-origin differences of non-smooth data are unreliable and
/// the cutoff keeps them out of the report (they still feed the integral).
pub fn caputo_derivative(
    u: &GridFunction,
    beta: f64,
    epsilon: f64,
) -> Result<Samples, GridError> {
    if !(beta > 0.0) || !(epsilon >= 0.0) {
        return Err(GridError::BadNodes(alloc::format!(
            "caputo_derivative needs beta > 0, epsilon >= 0 (got {beta}, {epsilon})"
        )));
    }
    let m = num::ceil_usize(beta);
    let w = nth_divided_derivative(u, m)?;
    let d = if (m as f64) == beta {
        w
    } else {
        rl_integral(&w, m as f64 - beta).expect("positive order")
    };
    let start = u.grid().first_node_at_or_after(epsilon);
    Ok(Samples {
        times: u.grid().nodes()[start..].to_vec(),
        values: d.values()[start..].to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gamma::gamma;
    use approx::assert_abs_diff_eq;

    fn sup_err(f: &GridFunction, reference: impl Fn(f64) -> f64) -> f64 {
        f.grid()
            .nodes()
            .iter()
            .zip(f.values())
            .fold(0.0f64, |a, (&t, &v)| a.max((v - reference(t)).abs()))
    }

    #[test]
    fn power_rule_examples() {
        assert_eq!(rl_power_rule(0.0, 0.6).unwrap(), (1.0, 0.6));
        let (c, e) = rl_power_rule(0.2, 0.6).unwrap();
        assert_abs_diff_eq!(c, gamma(1.6).unwrap() / gamma(1.8).unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(e, 0.8, epsilon = 0.0);
        let (c, e) = rl_power_rule(1.4, 0.2).unwrap();
        assert_abs_diff_eq!(c, gamma(1.2).unwrap() / gamma(2.6).unwrap(), epsilon = 1e-15);
        assert_abs_diff_eq!(e, 1.6, epsilon = 1e-15);
        assert!(rl_power_rule(0.2, -1.0).is_err());
    }

    #[test]
    fn caputo_power_rule_branches() {
        // integer power below ceil(beta) is annihilated
        assert_eq!(caputo_power_rule(2.0, 2.5).unwrap(), (0.0, 0.0));
        // D^2.2 t^2.6 = G(3.6)/G(1.4) t^0.4
        let (c, e) = caputo_power_rule(2.6, 2.2).unwrap();
        assert_abs_diff_eq!(c, gamma(3.6).unwrap() / gamma(1.4).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(e, 0.4, epsilon = 1e-15);
        // integer exponent at or above ceil(beta) follows the generic rule
        let (c, e) = caputo_power_rule(3.0, 2.5).unwrap();
        assert_abs_diff_eq!(c, 6.0 / gamma(1.5).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(e, 0.5, epsilon = 1e-15);
        // a non-integer exponent at or below beta - 1 has no Caputo derivative
        assert!(caputo_power_rule(0.5, 2.5).is_err());
        assert!(caputo_power_rule(1.5, 2.5).is_err());
    }

    #[test]
    fn weights_row_sums_are_exact_kernel_integrals() {
        // row sums with phi = 1 equal t_i^beta / beta exactly
        let g = Grid::graded(1.0, 8, 1.0).unwrap();
        for beta in [0.2, 0.7, 1.0, 1.6] {
            let w = quad_weights(beta, &g).unwrap();
            for i in 1..g.len() {
                let sum: f64 = w.row(i).iter().sum();
                let want = num::pow(g.nodes()[i], beta) / beta;
                assert_abs_diff_eq!(sum, want, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn weights_integrate_linear_phi_exactly() {
        // beta = 0.2, uniform N = 8, phi(s) = s: t^{1.2} B(2, 0.2), B(2,0.2) = 25/6
        let g = Grid::graded(1.0, 8, 1.0).unwrap();
        let w = quad_weights(0.2, &g).unwrap();
        let b2 = 25.0 / 6.0;
        for i in 1..g.len() {
            let got = dot(w.row(i), &g.nodes()[..=i]);
            let want = num::pow(g.nodes()[i], 1.2) * b2;
            assert!((got - want).abs() <= 1e-12, "row {i}: {got} vs {want}");
        }
    }

    #[test]
    fn weights_are_nonnegative() {
        let g = Grid::graded(1.0, 32, 2.0).unwrap();
        for beta in [0.1, 0.5, 1.0, 2.3] {
            let w = quad_weights(beta, &g).unwrap();
            for i in 0..g.len() {
                assert!(w.row(i).iter().all(|&x| x >= 0.0));
            }
        }
    }

    #[test]
    fn classical_trapezoid_at_beta_one() {
        let g = Grid::graded(1.0, 4, 1.0).unwrap();
        let w = quad_weights(1.0, &g).unwrap();
        assert_abs_diff_eq!(w.row(4)[0], 0.125, epsilon = 1e-15);
        assert_abs_diff_eq!(w.row(4)[1], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w.row(4)[2], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w.row(4)[3], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(w.row(4)[4], 0.125, epsilon = 1e-15);
    }

    #[test]
    fn rl_integral_of_zero_and_constant() {
        let g = Grid::graded(1.0, 64, 2.0).unwrap();
        let z = GridFunction::zero(g.clone());
        assert_eq!(rl_integral(&z, 0.7).unwrap().sup_norm(), 0.0);
        // J^0.5 of 1 = t^0.5 / Gamma(1.5), exact for the product rule
        let one = GridFunction::sample(g, |_| 1.0).unwrap();
        let j = rl_integral(&one, 0.5).unwrap();
        let c = gamma(1.5).unwrap();
        assert!(sup_err(&j, |t| num::pow(t, 0.5) / c) <= 1e-13);
    }

    #[test]
    fn rl_integral_uniform_power_example() {
        // f = s^0.6, delta = 0.2, uniform N = 1024: sup error <= 5e-3
        let g = Grid::graded(1.0, 1024, 1.0).unwrap();
        let f = GridFunction::sample(g, |t| num::pow(t, 0.6)).unwrap();
        let j = rl_integral(&f, 0.2).unwrap();
        let c = gamma(1.6).unwrap() / gamma(1.8).unwrap();
        let e = sup_err(&j, |t| c * num::pow(t, 0.8));
        assert!(e <= 5e-3, "sup error {e}");
    }

    #[test]
    fn caputo_examples() {
        let g = Grid::graded(1.0, 256, 2.0).unwrap();
        // constant annihilates
        let c = GridFunction::sample(g.clone(), |_| 3.0).unwrap();
        assert_eq!(caputo_derivative(&c, 0.7, 0.0).unwrap().sup_norm(), 0.0);
        // D^0.5 t = t^0.5 / Gamma(1.5)
        let lin = GridFunction::sample(g.clone(), |t| t).unwrap();
        let d = caputo_derivative(&lin, 0.5, 0.0).unwrap();
        let cg = gamma(1.5).unwrap();
        let worst = d
            .times
            .iter()
            .zip(&d.values)
            .fold(0.0f64, |a, (&t, &v)| a.max((v - num::pow(t, 0.5) / cg).abs()));
        assert!(worst <= 1e-12, "worst {worst}");
        // D^2.2 of G(1.6)/G(3.6) t^2.6 = G(1.6)/G(1.4) t^0.4 on [0.1, 1]
        let g2 = Grid::graded(1.0, 2048, 2.0).unwrap();
        let cu = gamma(1.6).unwrap() / gamma(3.6).unwrap();
        let u = GridFunction::sample(g2, |t| cu * num::pow(t, 2.6)).unwrap();
        let d = caputo_derivative(&u, 2.2, 0.1).unwrap();
        let cl = gamma(1.6).unwrap() / gamma(1.4).unwrap();
        let worst = d
            .times
            .iter()
            .zip(&d.values)
            .fold(0.0f64, |a, (&t, &v)| a.max((v - cl * num::pow(t, 0.4)).abs()));
        assert!(worst <= 1e-3, "worst {worst}");
        assert!(d.times[0] >= 0.1);
    }

    #[test]
    fn caputo_rejects_coarse_grid() {
        let g = Grid::from_nodes(vec![0.0, 0.5, 1.0], 1.0).unwrap();
        let u = GridFunction::zero(g);
        assert!(caputo_derivative(&u, 1.5, 0.0).is_err()); // needs ceil+2 = 4 nodes
    }
}
