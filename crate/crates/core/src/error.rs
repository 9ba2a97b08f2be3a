use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension {0}: lattice models need n >= 2")]
    InvalidDimension(usize),
    #[error("invalid couplings: {0}")]
    InvalidCouplings(String),
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("cannot eliminate variable {var}: {reason}")]
    InvalidElimination { var: usize, reason: String },
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("polynomial is not squarefree")]
    NotSquarefree,
    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(f64),
    #[error("elimination collapsed to the zero polynomial (variable order {order:?})")]
    EliminationFailure { order: Vec<usize> },
    #[error("no real positive EP{n} solution found")]
    NotFound { n: usize },
    #[error("singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("root finder did not converge after {iterations} iterations; last iterates {iterates:?}")]
    RootFinderFailure {
        iterations: usize,
        iterates: Vec<(f64, f64)>,
    },
    #[error("spectrum is degenerate (min gap {min_gap:e}); an exceptional point is suspected")]
    DegenerateSpectrum { min_gap: f64 },
    #[error("Jordan chain broke after {achieved} of {expected} vectors")]
    ChainBreak { achieved: usize, expected: usize },
    #[error("matrix is numerically singular (condition number {0:e})")]
    SingularMatrix(f64),
    #[error("metric is undefined outside the unbroken domain: {0}")]
    MetricUndefined(String),
    #[error("left eigenvector {index} has vanishing last component ({value:e})")]
    NormalizationFailure { index: usize, value: f64 },
    #[error("closed form leaves the real branch at t = {t} (discriminant {discriminant:e})")]
    BranchError { t: f64, discriminant: f64 },
    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),
    #[error("scan of {couplings} couplings needs values for every coupling outside the two scanned axes")]
    SliceRequired { couplings: usize },
    #[error("corridor root lost near A = {a} (beta = {beta}, gamma = {gamma})")]
    CorridorExit { a: f64, beta: f64, gamma: f64 },
    #[error("invalid scan: {0}")]
    InvalidScan(String),
    #[error("serialization failed: {0}")]
    Serialization(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
