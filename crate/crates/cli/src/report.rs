//! Structured-text (TOML) serialization of run artifacts.

use fracivp_core::{
    CaseTag, ConvergenceLog, ExistenceCertificate, HypothesisReport, SmoothnessReport, Solution,
    VolterraProblem,
};
use serde::Serialize;

pub const NO_GUARANTEE: &str = "no equivalence guarantee (forced reformulation)";

#[derive(Debug, Serialize)]
pub struct CaseDto {
    pub tag: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl CaseDto {
    pub fn from(tag: &CaseTag) -> Self {
        match tag {
            CaseTag::Unsupported(why) => {
                Self { tag: tag.name().into(), reason: Some(why.clone()) }
            }
            other => Self { tag: other.name().into(), reason: None },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct HypothesisDto {
    pub name: String,
    pub satisfied: bool,
    pub measured: f64,
}

#[derive(Debug, Serialize)]
pub struct HypothesesDto {
    pub all_satisfied: bool,
    pub checks: Vec<HypothesisDto>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl HypothesesDto {
    pub fn from(r: &HypothesisReport) -> Self {
        Self {
            all_satisfied: r.all_satisfied(),
            checks: r
                .checks
                .iter()
                .map(|c| HypothesisDto {
                    name: c.name.clone(),
                    satisfied: c.satisfied,
                    measured: c.measured,
                })
                .collect(),
            notes: r.notes.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReformulationDto {
    pub shape: String,
    pub reconstruction_order: f64,
    pub outer_order: f64,
    pub inner_orders: Vec<f64>,
    pub forcing_coefficients: Vec<f64>,
    pub lower_initials: Vec<f64>,
    pub guaranteed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl ReformulationDto {
    pub fn from(vp: &VolterraProblem) -> Self {
        Self {
            shape: vp.shape().name().into(),
            reconstruction_order: vp.reconstruction_order(),
            outer_order: vp.outer_order(),
            inner_orders: vp.inner_orders().to_vec(),
            forcing_coefficients: vp.forcing_coeffs().to_vec(),
            lower_initials: vp.lower_initials().to_vec(),
            guaranteed: vp.guaranteed(),
            warning: if vp.guaranteed() { None } else { Some(NO_GUARANTEE.into()) },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CertificateDto {
    pub case: String,
    pub k: f64,
    pub box_bound: f64,
    /// sup |f| over the sampled box; the value used in the h formula.
    pub m_sup_abs: f64,
    /// sup f over the same box, reported for comparison with the literal
    /// theorem statement.
    pub m_sup_signed: f64,
    pub theta: f64,
    pub h: f64,
    /// Alternative exponent variant and its interval, reported alongside.
    pub theta_alt: f64,
    pub h_alt: f64,
    pub sample_count: usize,
    pub skipped_points: usize,
    pub guaranteed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

impl CertificateDto {
    pub fn from(c: &ExistenceCertificate) -> Self {
        Self {
            case: c.case.clone(),
            k: c.k,
            box_bound: c.box_bound,
            m_sup_abs: c.m_abs,
            m_sup_signed: c.m_signed,
            theta: c.theta,
            h: c.h,
            theta_alt: c.theta_alt,
            h_alt: c.h_alt,
            sample_count: c.sample_count,
            skipped_points: c.skipped_points,
            guaranteed: c.guaranteed,
            warning: if c.guaranteed { None } else { Some(NO_GUARANTEE.into()) },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ConvergenceDto {
    pub iterations: usize,
    pub converged: bool,
    pub final_update: f64,
    pub equation_residual: f64,
    pub max_deviation_from_forcing: f64,
    pub origin_regularized: bool,
}

impl ConvergenceDto {
    pub fn from(log: &ConvergenceLog) -> Self {
        Self {
            iterations: log.iterations,
            converged: log.converged,
            final_update: log.sup_updates.last().copied().unwrap_or(0.0),
            equation_residual: log.equation_residual,
            max_deviation_from_forcing: log.max_deviation_from_forcing,
            origin_regularized: log.origin_regularized,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct SmoothnessDto {
    pub target_order: usize,
    pub g_at_zero: f64,
    pub c1_verdict: bool,
    /// Serialized as a string so that the +inf "vanishing differences"
    /// marker survives TOML.
    pub singular_exponent: String,
    pub exponent_stderr: f64,
    pub cm_verdict: bool,
    pub window_low: usize,
    pub window_high: usize,
    pub exponent_margin: f64,
    pub summary: String,
}

impl SmoothnessDto {
    pub fn from(r: &SmoothnessReport) -> Self {
        Self {
            target_order: r.target_order,
            g_at_zero: r.g_at_zero,
            c1_verdict: r.c1_verdict,
            singular_exponent: format!("{}", r.singular_exponent),
            exponent_stderr: r.exponent_stderr,
            cm_verdict: r.cm_verdict,
            window_low: r.window.0,
            window_high: r.window.1,
            exponent_margin: r.exponent_margin,
            summary: r.summary(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct InputEcho {
    pub orders: Vec<f64>,
    pub initial_values: Vec<f64>,
    pub horizon: f64,
    pub rhs: String,
    pub grid_n: usize,
    pub grid_grading: f64,
    pub solver_mode: String,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub damping: f64,
    pub force: bool,
    pub fractional_reconstruction: bool,
}

/// Everything one `solve` run reports, echoed inputs included.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub input: InputEcho,
    pub case: CaseDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hypotheses: Option<HypothesesDto>,
    pub reformulation: ReformulationDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<CertificateDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate_note: Option<String>,
    pub convergence: ConvergenceDto,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothness: Option<SmoothnessDto>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_csv: Option<String>,
}

impl RunReport {
    pub fn new(input: InputEcho, sol: &Solution) -> Self {
        Self {
            input,
            case: CaseDto::from(&sol.tag),
            hypotheses: sol.hypotheses.as_ref().map(HypothesesDto::from),
            reformulation: ReformulationDto::from(&sol.vp),
            certificate: None,
            certificate_note: None,
            convergence: ConvergenceDto::from(&sol.log),
            smoothness: None,
            output_csv: None,
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("report serializes")
    }
}
