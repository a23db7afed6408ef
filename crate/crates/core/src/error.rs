use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("symbols live on different dual lattices")]
    LatticeMismatch,

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("non-finite value while evaluating {context}")]
    NonFinite { context: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("order consistency: term `{label}` has order {order} above the declared {declared}")]
    OrderConsistency { label: String, order: f64, declared: f64 },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("unitarity lost (max deviation {0:e})")]
    NotUnitary(f64),

    #[error("eigen residual {residual:e} exceeds tolerance {tol:e}")]
    EigenResidual { residual: f64, tol: f64 },

    #[error("not real (defect {0:e})")]
    NotReal(f64),

    #[error("mode {0:?} is not in the truncated basis")]
    UnknownMode(Vec<i64>),

    #[error("config: {0}")]
    Config(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidLattice(_) => "invalid_lattice",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::LatticeMismatch => "lattice_mismatch",
            Error::Parse { .. } => "parse",
            Error::NonFinite { .. } => "non_finite",
            Error::Domain(_) => "domain",
            Error::InvalidParams(_) => "invalid_params",
            Error::Hypothesis(_) => "hypothesis",
            Error::Precondition(_) => "precondition",
            Error::OrderConsistency { .. } => "order_consistency",
            Error::NotHermitian(_) => "not_hermitian",
            Error::NotUnitary(_) => "not_unitary",
            Error::EigenResidual { .. } => "eigen_residual",
            Error::NotReal(_) => "not_real",
            Error::UnknownMode(_) => "unknown_mode",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
