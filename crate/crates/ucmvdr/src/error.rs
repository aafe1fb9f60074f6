use crate::covariance::CovarianceKind;

/// Errors produced by the beamforming library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A direction cosine fell outside [-1, 1].
    #[error("direction cosine u = {value} outside [-1, 1]")]
    DirectionOutOfRange { value: f64 },

    /// Array geometry or scene parameters violate an invariant.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A snapshot count of zero was requested.
    #[error("snapshot count must be at least 1")]
    InvalidSnapshotCount,

    /// A matrix handed to `CovarianceMatrix` is not Hermitian.
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    /// A covariance matrix has an eigenvalue below the PSD floor.
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPositiveSemidefinite { min_eigenvalue: f64 },

    /// A covariance matrix is too ill-conditioned to invert.
    #[error("covariance is numerically singular (min eigenvalue {min_eigenvalue:.6e})")]
    SingularCovariance { min_eigenvalue: f64 },

    /// Negative diagonal loading factor.
    #[error("diagonal loading factor must be nonnegative, got {0}")]
    NegativeLoading(f64),

    /// The wrong covariance estimate kind was supplied to an operation.
    #[error("operation requires a {expected:?} covariance, got {got:?}")]
    WrongCovarianceKind {
        expected: CovarianceKind,
        got: CovarianceKind,
    },

    /// Mismatched dimensions between a covariance matrix and an array config.
    #[error("dimension mismatch: covariance is {cov} x {cov}, array has {array} sensors")]
    DimensionMismatch { cov: usize, array: usize },

    /// A weight vector does not satisfy |w^H v0| = 1.
    #[error("weights violate the distortionless constraint (|w^H v0| = {gain:.6e})")]
    NotDistortionless { gain: f64 },

    /// The leading polynomial coefficient is (numerically) zero, so the
    /// polynomial degree would drop.
    #[error(
        "degenerate polynomial: leading coefficient magnitude {leading:.3e} \
         below threshold {threshold:.3e}"
    )]
    DegeneratePolynomial { leading: f64, threshold: f64 },

    /// A zero at the origin has no angle and cannot be projected.
    #[error("zero #{index} lies at the origin; its angle is undefined")]
    ZeroAtOrigin { index: usize },

    /// The eigenvalue iteration behind the root finder did not converge.
    #[error("eigenvalue iteration failed to converge")]
    EigenNonConvergence,

    /// Polynomial-domain operations require the standard half-wavelength ULA.
    #[error("operation requires d/lambda = 0.5, got {0}")]
    RequiresHalfWavelengthSpacing(f64),

    /// Diagonal-loading calibration cannot reach the requested mean WNG
    /// within the search bracket.
    #[error(
        "target mean WNG {target:.4} outside achievable range \
         [{min_achievable:.4}, {max_achievable:.4}]"
    )]
    CalibrationOutOfRange {
        target: f64,
        min_achievable: f64,
        max_achievable: f64,
    },

    /// An operation that needs data received an empty input.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// A referenced scene source does not exist.
    #[error("source index {index} out of range for scene with {n_sources} sources")]
    SourceIndexOutOfRange { index: usize, n_sources: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
