use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration for `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("no buckled solution for kappa = {kappa}: {reason}")]
    NoBuckledSolution { kappa: f64, reason: String },

    #[error("integration diverged for kappa = {kappa}, slope0 = {slope0}: pin event not reached before t = {t_max}")]
    Divergence { kappa: f64, slope0: f64, t_max: f64 },

    #[error("shooting did not converge for kappa = {kappa} after {iterations} iterations (residual {residual:.3e})")]
    NotConverged { kappa: f64, iterations: usize, residual: f64 },

    #[error("end-shortening {query:.6e} m outside curve range [{min:.6e}, {max:.6e}] m (nearest endpoint {nearest:.6e} m)")]
    OutOfRange { query: f64, min: f64, max: f64, nearest: f64 },

    #[error("trial incomplete: travel ended during the {phase} phase")]
    IncompleteTrial { phase: &'static str },

    #[error("no contact source: trace has no force channel and no contact index override")]
    MissingContactSource,

    #[error("contact force threshold {threshold} N never reached")]
    NoContact { threshold: f64 },

    #[error("strain norm threshold {threshold:.3e} never reached")]
    NoBuckling { threshold: f64 },

    #[error("indentation depth is zero between contact index {contact} and buckling index {buckling}")]
    SingularIndentation { contact: usize, buckling: usize },

    #[error("{path}: line {line}: {reason}")]
    Parse { path: PathBuf, line: u64, reason: String },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config { key: key.into(), reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures of the numerical pipeline, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoBuckledSolution { .. }
                | Error::Divergence { .. }
                | Error::NotConverged { .. }
                | Error::OutOfRange { .. }
                | Error::IncompleteTrial { .. }
                | Error::NoContact { .. }
                | Error::NoBuckling { .. }
                | Error::SingularIndentation { .. }
        )
    }
}
