use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix exponential overflowed (norm {norm:e})")]
    Overflow { norm: f64 },

    #[error("matrix is not Hermitian positive semidefinite: eigenvalue {eigenvalue:e} below -{tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("matrix is not Hermitian: asymmetry {asymmetry:e} exceeds {tolerance:e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("operator is not dissipative: Hermitian defect has eigenvalue {eigenvalue:e} (allowed {tolerance:e})")]
    NotDissipative { eigenvalue: f64, tolerance: f64 },

    #[error("operator is not accretive: Hermitian part has eigenvalue {eigenvalue:e} (allowed {tolerance:e})")]
    NotAccretive { eigenvalue: f64, tolerance: f64 },

    #[error("operator is not a contraction: norm {norm} exceeds 1 + {tolerance:e}")]
    NotContraction { norm: f64, tolerance: f64 },

    #[error("matrix is singular: smallest singular value {smallest:e} (threshold {threshold:e})")]
    Singular { smallest: f64, threshold: f64 },

    #[error("eigenvalue iteration failed to converge")]
    EigenFailure,

    #[error("{what} did not converge by {horizon}; last residual {residual:e}")]
    NotConverged {
        what: &'static str,
        horizon: f64,
        residual: f64,
    },

    #[error("bound violated ({what}) at {at}: measured {measured:e} > bound {bound:e}")]
    BoundViolation {
        what: &'static str,
        at: f64,
        measured: f64,
        bound: f64,
    },

    #[error("vector is not in the physical phase space: residual {residual:e}")]
    NotInPhaseSpace { residual: f64 },

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid coefficients: {0}")]
    Coefficients(String),

    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}
