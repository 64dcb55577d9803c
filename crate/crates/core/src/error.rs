use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// A field evaluation produced a non-finite number, or the point lies
    /// outside the declared domain (e.g. a collision radius).
    #[error("domain error at {point:?}: {reason}")]
    Domain { point: Vec<f64>, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("momentum map not regular: Jacobian rank {rank}, expected {expected}")]
    NotRegular { rank: usize, expected: usize },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("singular Jacobian: rank {rank} of {size}")]
    SingularJacobian { rank: usize, size: usize },

    #[error("certification failed: residual {residual:e} exceeds tolerance {tol:e}")]
    NotCertified { residual: f64, tol: f64 },

    #[error("degenerate spectrum at t = {t}: eigenvalue gap {gap:e}")]
    DegenerateSpectrum { t: f64, gap: f64 },

    #[error("evaluation at a declared chart degeneracy: {0}")]
    ChartDegeneracy(String),

    #[error("no bracketing interval found: {trace}")]
    NoBracket { trace: String },

    #[error("config error (line {line}): {message}")]
    Config { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
