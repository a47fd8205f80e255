use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("improper transfer function: numerator degree {num_degree} exceeds denominator degree {den_degree}")]
    Improper { num_degree: usize, den_degree: usize },

    #[error("zero polynomial where a nonzero one is required ({0})")]
    ZeroPolynomial(&'static str),

    #[error("denominator must have a nonzero constant term")]
    ZeroDcDenominator,

    #[error("sampling period must be positive and finite, got {0}")]
    InvalidSamplePeriod(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("filters in a bank must share one denominator")]
    DenominatorMismatch,

    #[error("polynomial {coeffs:?} is not Hurwitz")]
    NotHurwitz { coeffs: Vec<f64> },

    #[error("normal matrix is numerically singular (condition number {condition:.3e})")]
    SingularNormalMatrix { condition: f64 },

    #[error("iterate has an unstable denominator: {theta:?}")]
    NonHurwitzIterate { theta: Vec<f64> },

    #[error("discrete system is not Schur stable (spectral radius {spectral_radius})")]
    NotSchurStable { spectral_radius: f64 },

    #[error("Lyapunov equation could not be solved")]
    LyapunovFailure,

    #[error("information matrix is singular or indefinite (condition number {condition:.3e}); check excitation and parameterization")]
    SingularInformation { condition: f64 },

    #[error("system violates identifiability assumptions: {0}")]
    Unidentifiable(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("all {runs} Monte Carlo runs failed; first failure: {first}")]
    AllRunsFailed { runs: usize, first: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
