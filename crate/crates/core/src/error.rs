use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("ground state did not converge after {iterations} iterations (residual {residual:.3e}, last energy change {delta:.3e} Ha)")]
    Convergence { iterations: usize, residual: f64, delta: f64 },

    #[error("well-width calibration failed: {0}")]
    Calibration(String),

    #[error(
        "numerical instability at step {step} (t = {time:.3} a.u.): norm {norm:.12} exceeds initial {initial:.12}"
    )]
    Instability { step: usize, time: f64, norm: f64, initial: f64 },

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("degenerate fit: {0}")]
    Degenerate(String),

    #[error("delay sampling too coarse: {0}")]
    Sampling(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), message: err.to_string() }
    }
}
