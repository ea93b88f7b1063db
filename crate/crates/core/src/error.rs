use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("response cannot be normalized: {0}")]
    NonNormalizable(String),

    #[error("signal and idler group slownesses coincide ({0:e} s/m); the long-pulse rate diverges")]
    DegenerateSlowness(f64),

    #[error("step rejected at z = {z:.6e} m: nonlinear phase {phase:.3} rad exceeds {limit} rad")]
    StepTooLarge { z: f64, phase: f64, limit: f64 },

    #[error("aliasing guard: {fraction:.3e} of the {what} spectral energy sits near the grid edge (limit {limit:.1e})")]
    Aliasing {
        what: &'static str,
        fraction: f64,
        limit: f64,
    },

    #[error("z quadrature did not converge with {nodes} nodes (relative change {change:.3e})")]
    NoConvergence { nodes: usize, change: f64 },

    #[error("singular value decomposition failed: {0}")]
    Svd(String),

    #[error("malformed grid file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::StepTooLarge { .. }
                | Error::Aliasing { .. }
                | Error::NoConvergence { .. }
                | Error::Svd(_)
                | Error::NonNormalizable(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
