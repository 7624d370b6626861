use thiserror::Error;

/// Errors raised by the numerical and metric layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("root not bracketed: f({lo}) = {f_lo}, f({hi}) = {f_hi}")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("no convergence after {iterations} iterations, last bracket [{lo}, {hi}]")]
    Convergence { iterations: usize, lo: f64, hi: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("transmission not permitted: gain {gain} below minimum {g_min}")]
    NotPermitted { gain: f64, g_min: f64 },

    #[error("infeasible: single-branch DOR saturates at {saturated_dor}")]
    Infeasible { saturated_dor: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
