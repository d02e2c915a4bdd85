use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch { expected: Vec<usize>, found: Vec<usize> },

    #[error("mode {mode} out of range for a {modes}-mode state")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("expected {expected} amplitudes for the given dims, found {found}")]
    AmplitudeCount { expected: usize, found: usize },

    #[error("state is not normalized: squared norm {norm_sqr}")]
    NotNormalized { norm_sqr: f64 },

    #[error("matrix for mode {mode} is not unitary (max deviation {deviation:e})")]
    NotUnitary { mode: usize, deviation: f64 },

    #[error("vectors are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("vector for mode {mode} is not a unit vector (norm {norm})")]
    NotUnitVector { mode: usize, norm: f64 },

    #[error("generator is not anti-Hermitian (max deviation {deviation:e})")]
    NotAntiHermitian { deviation: f64 },

    #[error("shape {0:?} is not canonical-ready (need n >= 3 and 2 <= d1 <= ... <= dn)")]
    NotCanonicalReady(Vec<usize>),

    #[error("constraint leaves no allowed directions in mode {mode}")]
    EmptySubspace { mode: usize },

    #[error("initial vector violates the constraint in mode {mode} (leakage {leakage:e})")]
    InitViolatesConstraint { mode: usize, leakage: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("state file format error: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
