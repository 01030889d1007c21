use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Specific volume dropped below the configured floor; the pressure
    /// `a / xi^gamma` is about to blow up.
    #[error("vacuum approach: xi = {xi:e} below floor {floor:e} (t = {t})")]
    VacuumApproach { xi: f64, floor: f64, t: f64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error("invalid initial data: {}", format_violations(.0))]
    InvalidInitialData(Vec<Violation>),

    #[error("insufficient resolution: grid of {m} points cannot resolve {n} modes (need at least {})", 2 * .n + 1)]
    InsufficientResolution { m: usize, n: usize },

    #[error("argument outside the domain of {what}: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("boundary ODE step control failed at t = {t} after {substeps} substeps")]
    StiffnessFailure { t: f64, substeps: usize },

    #[error("boundary value {pi} left the bracket [{lower}, {upper}]")]
    BracketViolation { pi: f64, lower: f64, upper: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("Eulerian map is not monotone at grid index {index}")]
    NonMonotoneMap { index: usize },

    #[error("monitor `{name}` failed at t = {t}: magnitude {magnitude:e}")]
    MonitorViolation {
        name: String,
        magnitude: f64,
        t: f64,
    },

    /// Configuration file could not be parsed or is inconsistent.
    #[error("config: {0}")]
    Config(String),

    #[error("non-finite value in state at t = {t}")]
    NonFinite { t: f64 },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T> = std::result::Result<T, Error>;
