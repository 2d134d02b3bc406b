use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("matrix is not Hermitian (max |H - H^dagger| = {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix is not unitary (max |U U^dagger - I| = {0:.3e})")]
    NotUnitary(f64),

    #[error("state is not normalized (norm = {0})")]
    NotNormalized(f64),

    #[error("qudit dimension {0} outside supported range 2..=8")]
    InvalidDimension(usize),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("expected {expected} product-state angles, got {got}")]
    WrongAngleCount { expected: usize, got: usize },

    #[error("product-state angle {0} outside [0, pi]")]
    AngleOutOfRange(f64),

    #[error("unknown contour curve {0:?} (expected OB, OG or GB)")]
    UnknownCurve(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty ensemble: {0}")]
    EmptyEnsemble(&'static str),

    #[error("invalid Schmidt target: {0}")]
    InvalidTarget(String),

    #[error(
        "no parameters found within tolerance {tol:e}: best residual {residual:e} at theta = {theta}, phi = {phi:?}"
    )]
    NoSolutionFound {
        tol: f64,
        residual: f64,
        theta: f64,
        phi: Vec<f64>,
    },

    #[error("non-finite value encountered: {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;
