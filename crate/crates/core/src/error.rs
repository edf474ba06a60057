use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MixError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite {what} at grid site {site}")]
    NonFinite { site: usize, what: &'static str },
    #[error("conjugate symmetry violated at mode {mode} (defect {defect:e})")]
    Symmetry { mode: i64, defect: f64 },
    #[error("time step {dt} exceeds stability bound {bound}")]
    Stability { dt: f64, bound: f64 },
}

pub type Result<T> = std::result::Result<T, MixError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> MixError {
    MixError::InvalidParameter { name, reason: reason.into() }
}
