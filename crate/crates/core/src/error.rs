//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point outside the domain of {what}: {detail}")]
    Domain { what: String, detail: String },

    #[error("metric singularity: |{guard}| = {value:e} is below the guard")]
    MetricSingularity { guard: &'static str, value: f64 },

    #[error("division by zero: {quantity} = {value:e}")]
    DivisionByZero { quantity: &'static str, value: f64 },

    #[error("denominator of {which} vanishes ({value:e})")]
    DenominatorVanishes { which: &'static str, value: f64 },

    #[error("guard violated: {guard} = {value:e}")]
    GuardViolation { guard: String, value: f64 },

    #[error("curvature gradient vanishes (|dK|^2 = {0:e})")]
    GradientVanishes(f64),

    #[error("degenerate constants: {0}")]
    DegenerateConstants(String),

    #[error("flow left the domain at t = {t}")]
    LeftDomain { t: f64 },

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("amplitude blow-up at t = {t}")]
    BlowUp { t: f64 },

    #[error("quadrature failed to converge: {0}")]
    QuadratureFailure(String),

    #[error("ranks differ across probe points: {0}")]
    NonGenericPoint(String),

    #[error("Goursat constraint violated in row {row}: {detail}")]
    ConstraintFailure { row: usize, detail: String },

    #[error("normalisation Zt = {value} differs from 1")]
    NormalizationFailure { value: f64 },

    #[error("CFL ratio {ratio} exceeds {max}")]
    CflViolation { ratio: f64, max: f64 },

    #[error("parse error at position {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("bracket nesting exceeds the jet capacity")]
    TooDeep,

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub fn guard(name: impl Into<String>, value: f64) -> Self {
        Error::GuardViolation {
            guard: name.into(),
            value,
        }
    }

    pub fn domain(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Domain {
            what: what.into(),
            detail: detail.into(),
        }
    }

    /// Short machine-readable tag, used in status masks and reports.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::MetricSingularity { .. } => "metric-singularity",
            Error::DivisionByZero { .. } => "division-by-zero",
            Error::DenominatorVanishes { .. } => "denominator-vanishes",
            Error::GuardViolation { .. } => "guard",
            Error::GradientVanishes(_) => "gradient-vanishes",
            Error::DegenerateConstants(_) => "degenerate-constants",
            Error::LeftDomain { .. } => "left-domain",
            Error::StepUnderflow { .. } => "step-underflow",
            Error::BlowUp { .. } => "amplitude",
            Error::QuadratureFailure(_) => "quadrature",
            Error::NonGenericPoint(_) => "non-generic",
            Error::ConstraintFailure { .. } => "constraint",
            Error::NormalizationFailure { .. } => "normalisation",
            Error::CflViolation { .. } => "cfl",
            Error::Parse { .. } => "parse",
            Error::TooDeep => "too-deep",
            Error::Config(_) => "config",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Fail with `MetricSingularity` when `|value| < eps`.
pub(crate) fn check_metric(guard: &'static str, value: f64, eps: f64) -> Result<()> {
    if value.abs() < eps || !value.is_finite() {
        Err(Error::MetricSingularity { guard, value })
    } else {
        Ok(())
    }
}

/// Fail with `DivisionByZero` when `|value| < eps`.
pub(crate) fn check_nonzero(quantity: &'static str, value: f64, eps: f64) -> Result<()> {
    if value.abs() < eps || !value.is_finite() {
        Err(Error::DivisionByZero { quantity, value })
    } else {
        Ok(())
    }
}
