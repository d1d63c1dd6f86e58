use thiserror::Error;

/// Failures surfaced by the library. The CLI maps these onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("covariance matrix is not symmetric positive definite")]
    CovarianceNotSpd,
    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("dimension must be at least 1")]
    EmptyDimension,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("d = {d} lies in the infinite-covariance band around n_tilde = {n_tilde}")]
    InfiniteCovariance { d: usize, n_tilde: usize },
    #[error("joint covariance is singular (smallest eigenvalue {min_eigenvalue:e})")]
    JointCovarianceSingular { min_eigenvalue: f64 },
    #[error("linear system is not positive definite even after jitter")]
    SingularSystem,
    #[error("outside the validity range of the formula: {0}")]
    OutOfScope(String),
    #[error("fixed point did not converge: c = {c}, residual = {residual:e} after {iterations} iterations")]
    FixedPoint { c: f64, residual: f64, iterations: usize },
    #[error("misspecification reduction needs isotropic features")]
    ReductionNotValid,
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("tables do not line up: {0}")]
    Join(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::CovarianceNotSpd
                | Error::JointCovarianceSingular { .. }
                | Error::SingularSystem
                | Error::FixedPoint { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
