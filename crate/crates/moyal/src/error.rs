use thiserror::Error;

/// Errors raised by grid construction, transforms and the star-product backends.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite value {value} at node ({i}, {j}) = (x {x}, p {p})")]
    NonFinite { i: usize, j: usize, x: f64, p: f64, value: String },
    #[error("operands live on different grids")]
    GridMismatch,
    #[error("field is not real valued (max |Im| = {0:e})")]
    NotReal(f64),
    #[error("boundary mass {mass:e} exceeds {limit:e}")]
    BoundaryMass { mass: f64, limit: f64 },
    #[error("wavefunction is not normalized (norm² = {0})")]
    NotNormalized(f64),
    #[error("polynomial degree {0} exceeds the limit of 64")]
    DegreeOverflow(usize),
    #[error("series order {0} exceeds 16")]
    SeriesOrder(usize),
    #[error("{0}")]
    Unsupported(String),
    #[error("parameter out of domain: {0}")]
    Domain(String),
    #[error("stability guard: dt * radius = {0} >= 0.5")]
    Unstable(f64),
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),
    #[error("index {index} out of range (limit {limit})")]
    OutOfRange { index: usize, limit: usize },
    #[error("supersymmetry is broken: {0}")]
    BrokenSusy(String),
    #[error("parse error at {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("io: {0}")]
    Io(String),
    #[error("format: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
