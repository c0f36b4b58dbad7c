use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{which} violates its symmetry requirement (residual {residual:.3e} > {tolerance:.3e})")]
    Symmetry {
        which: &'static str,
        residual: f64,
        tolerance: f64,
    },

    #[error("near-neutral breakdown at block {block} (|gamma| = {gamma:.3e})")]
    NeutralBreakdown { block: usize, gamma: f64 },

    #[error("singular Gram matrix (sigma_min / sigma_max = {ratio:.3e})")]
    SingularGram { ratio: f64 },

    #[error("zero norm column at block {block} in the Omega-inner product")]
    ZeroOmegaNorm { block: usize },

    #[error("matrix is not positive definite")]
    NotDefinite,

    #[error("projected Rayleigh-Ritz problem is not definite")]
    ProjectedNotDefinite,

    #[error("dense structured solve failed its residual check ({0:.3e})")]
    ResidualCheck(f64),

    #[error("singular preconditioner diagonal at index {index} (|d| = {value:.3e})")]
    SingularPreconditioner { index: usize, value: f64 },

    #[error("imaginary residue {residue:.3e} exceeds tolerance {tolerance:.3e}")]
    ImaginaryResidue { residue: f64, tolerance: f64 },

    #[error("symplectic structure check failed: {0}")]
    SymplecticCheck(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("irrecoverable breakdown: {0}")]
    Breakdown(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for the failures that the solver answers with an Omega-metric retry.
    pub fn is_c_metric_breakdown(&self) -> bool {
        matches!(
            self,
            Error::NeutralBreakdown { .. } | Error::SingularGram { .. } | Error::ProjectedNotDefinite
        )
    }
}
