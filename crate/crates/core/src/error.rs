use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("gamma function pole at z = {0}")]
    Pole(i64),
    #[error("kernel is singular at the origin")]
    SingularPoint,
    #[error("point {0:?} lies outside the grid domain [-L, L)")]
    Domain(Vec<f64>),
    #[error("exponent {alpha} lies on the exceptional lattice; use {use_instead}")]
    Lattice { alpha: f64, use_instead: &'static str },
    #[error("degenerate parameter: {0}")]
    Degenerate(String),
    #[error("window error: {0}")]
    Window(String),
    #[error("ill-conditioned system: {0}")]
    Conditioning(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
