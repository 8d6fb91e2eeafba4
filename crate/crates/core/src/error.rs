use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument sits on a pole of the gamma function.
    #[error("pole of the gamma function at {re}{im:+}i")]
    Pole { re: f64, im: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} did not converge after {iterations} iterations")]
    NonConvergence { what: &'static str, iterations: usize },

    #[error("no contour separates the poles: {0}")]
    InfeasibleContour(String),

    #[error("imaginary residue {im:e} exceeds tolerance {tol:e}")]
    ImaginaryResidue { im: f64, tol: f64 },

    #[error("degenerate sample: residual variance estimate is zero")]
    DegenerateSample,

    #[error("target {target} is not bracketed by the curve")]
    Bracket { target: f64 },

    #[error("insufficient trials: {trials} trials at pfa {pfa:e} give fewer than {min_exceedances} exceedances")]
    InsufficientTrials { trials: u64, pfa: f64, min_exceedances: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
