use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (anti-Hermitian part {deviation:e} exceeds 1e-8)")]
    NotHermitian { deviation: f64 },

    #[error("eigendecomposition failed to converge for a {dim}x{dim} matrix")]
    Decomposition { dim: usize },

    #[error("eigenvalue {eigenvalue:e} is outside the domain of {function}")]
    Domain { eigenvalue: f64, function: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invariant violated ({invariant}): {detail}")]
    Invariant {
        invariant: &'static str,
        detail: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(
        "evaluation at a rank-deficient point (minimum eigenvalue {min_eigenvalue:e}); {hint}"
    )]
    Boundary {
        min_eigenvalue: f64,
        hint: &'static str,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_iteration(self, iteration: usize) -> Self {
        Error::Solver {
            iteration,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping iteration context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Solver { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
