use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("spectral parameter on spectrum: {re} + {im}i lies in [{bottom}, inf)")]
    OnSpectrum { re: f64, im: f64, bottom: f64 },
    #[error("point outside chart {chart}: {reason}")]
    OutsideChart { chart: &'static str, reason: String },
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("linear solver failure: {0}")]
    Solver(String),
    #[error("fit failure: {0}")]
    Fit(String),
    #[error("iteration failed to contract: measured factor {0:.3}")]
    NoContraction(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
