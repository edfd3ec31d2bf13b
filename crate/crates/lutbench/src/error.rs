//! Crate-wide error type.

use std::path::PathBuf;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Every failure mode the library can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A Cholesky pivot came out non-positive. Callers doing Gaussian-process
    /// training treat this as a signal to raise the diagonal jitter.
    #[error("matrix not positive definite: pivot {pivot:.3e} at row {index}")]
    NotPositiveDefinite { index: usize, pivot: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The Jacobi eigensolver exhausted its sweep budget.
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),

    /// A pivot fell below the singularity threshold; upstream this usually
    /// means a degenerate simplex.
    #[error("singular linear system: pivot {pivot:.3e} below threshold")]
    Singular { pivot: f64 },

    #[error("invalid bounds for variable {name}: min {min} > max {max}")]
    InvalidBounds { name: String, min: f64, max: f64 },

    #[error("{got} free dimensions exceed the supported limit of {limit}")]
    TooManyDimensions { got: usize, limit: usize },

    #[error("design specs mismatch: {0}")]
    SpecMismatch(String),

    #[error("non-finite input value in {0}")]
    NonFiniteInput(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("too few points: got {got}, need at least {need}")]
    TooFewPoints { got: usize, need: usize },

    /// The query point is not contained in any simplex of the complex.
    #[error("query point lies outside the convex hull of the nodes")]
    OutsideHull,

    #[error("rank deficient: {found} positive eigenvalues, {requested} components requested")]
    RankDeficient { found: usize, requested: usize },

    #[error("hyperparameter optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// Reference spectra have zero range at every wavelength, so the
    /// normalized error is undefined everywhere.
    #[error("degenerate reference range: no wavelength has max > min")]
    DegenerateRange,

    #[error("too few samples: got {got}, need at least {need}")]
    TooFewSamples { got: usize, need: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("unsupported container schema version {found} in {path} (this build reads version {expected})")]
    Version {
        path: PathBuf,
        found: u64,
        expected: u64,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code the CLI maps this error to: 2 for configuration
    /// problems, 3 for data/file problems, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidConfig(_)
            | Error::InvalidBounds { .. }
            | Error::TooManyDimensions { .. }
            | Error::SpecMismatch(_) => 2,
            Error::Io { .. } | Error::Format { .. } | Error::Version { .. } => 3,
            _ => 4,
        }
    }
}
