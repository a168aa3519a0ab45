//! Solver library for multi-term Caputo-type fractional initial value
//! problems.
//!
//! The pipeline: classify the problem against the equivalence theorems, check
//! their hypotheses, rewrite the IVP as a weakly singular Volterra integral
//! equation for `v = u^(m)`, solve it by Picard or node-by-node iteration on
//! a graded grid with product-trapezoidal quadrature, reconstruct `u`, and
//! diagnose the regularity of the result near `t = 0`.
//!
//! The crate is `no_std`-compatible (`alloc` required): disable the default
//! `std` feature and enable `libm`.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` rejects NaN along with the out-of-range values; `x <= 0.0`
// would wave NaN through. Oracle constants keep their full reference digits.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision)]

extern crate alloc;

#[cfg(feature = "std")]
extern crate std;

mod num;

pub mod corpus;
pub mod error;
pub mod existence;
pub mod expr;
pub mod gamma;
pub mod grid;
pub mod problem;
pub mod quad;
pub mod smoothness;
pub mod solver;

pub use error::{DomainError, GridError};
pub use existence::{certificate, existence_interval, g_box, sup_estimate, ExistenceCertificate};
pub use expr::Expression;
pub use gamma::gamma;
pub use grid::{nth_divided_derivative, Grid, GridFunction, Samples};
pub use problem::{
    check_hypotheses, classify, reconstruct_u, reformulate, reformulate_forced, residual, CaseTag,
    HypothesisReport, ProblemSpec, ReformShape, VolterraProblem,
};
pub use quad::{caputo_derivative, caputo_power_rule, quad_weights, rl_integral, rl_power_rule};
pub use smoothness::{c1_criterion, singular_exponent, smoothness_report, SmoothnessReport};
pub use solver::{
    picard_solve, solve_ivp, step_solve, ConvergenceLog, SolveError, SolveOptions, Solution,
    SolverConfig, SolverMode,
};
