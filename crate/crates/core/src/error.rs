use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("size {n} is invalid for family {family}: {reason}")]
    InvalidFamilySize {
        family: &'static str,
        n: usize,
        reason: &'static str,
    },
    #[error("a problem needs at least 2 variables, got {0}")]
    TooFewVariables(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{n} variables exceeds the supported maximum of {max}")]
    TooLarge { n: usize, max: usize },
    #[error("weight matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("diagonal entry {0} must be zero")]
    NonzeroDiagonal(usize),
    #[error("matrix or vector contains a non-finite entry")]
    NonFinite,
    #[error("spin entries must be +1 or -1")]
    InvalidSpin,
    #[error("optimal objective is zero; approximation ratio is undefined")]
    UndefinedRatio,
    #[error("index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("the closed form only covers instances without one-body terms")]
    LinearTermsUnsupported,
    #[error("symmetric eigensolver did not converge")]
    EigenNonConvergence,
    #[error("instance structure not supported: expected {0}")]
    WrongStructure(&'static str),
    #[error("negative weight {weight} on edge ({i}, {j})")]
    NegativeWeight { i: usize, j: usize, weight: f64 },
    #[error("sample set is empty")]
    EmptySamples,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
