use thiserror::Error;

/// Errors raised by constructors and checked operations across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("factor index {index} out of range for a space with {factors} factors")]
    FactorOutOfRange { index: usize, factors: usize },

    #[error("operator is not hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("operator is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("invalid density operator: {0}")]
    InvalidDensity(String),

    #[error("partial trace needs at least one kept factor")]
    EmptyKeep,

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("invalid spin {0}: expected a positive half-integer")]
    InvalidSpin(f64),

    #[error("factors must all have the same dimension, found {0:?}")]
    UnequalFactors(Vec<usize>),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("invalid charge model: {0}")]
    InvalidCharge(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("mereology: {0}")]
    Mereology(String),

    #[error("conditional slice at x1 = {x1} carries negligible weight ({weight:.3e})")]
    NegligibleSlice { x1: f64, weight: f64 },

    #[error("wire format: {0}")]
    Wire(String),
}

pub type Result<T> = std::result::Result<T, Error>;
