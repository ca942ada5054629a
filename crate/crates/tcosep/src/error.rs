//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by tensor construction, algebra, selection and I/O.
#[derive(Error, Debug)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("index {index} out of range for mode of extent {extent}")]
    IndexOutOfRange { index: usize, extent: usize },

    #[error("index list has mode {found:?}, expected {expected:?}")]
    ModeMismatch {
        expected: crate::tensor::Mode,
        found: crate::tensor::Mode,
    },

    #[error("duplicate index {0} in a list that must be duplicate-free")]
    DuplicateIndex(usize),

    #[error("non-finite value at flat offset {0}")]
    NonFinite(usize),

    #[error("SVD did not converge after {sweeps} sweeps (best off-diagonal residual {residual:.3e})")]
    SvdNonConvergence { sweeps: usize, residual: f64 },

    #[error("frontal slice {slice} (1-based, Fourier domain) is singular")]
    SingularSlice { slice: usize },

    #[error("invalid sampling distribution: {0}")]
    InvalidDistribution(String),

    #[error("sampling produced only {got} unique indices, {needed} required")]
    SamplingExhausted { needed: usize, got: usize },

    #[error("selection requires {needed} candidates but only {available} columns have nonzero weight")]
    NotEnoughCandidates { needed: usize, available: usize },

    #[error("Sinkhorn scaling did not converge after {rounds} rounds (max slice-sum deviation {deviation:.3e})")]
    SinkhornNonConvergence { rounds: usize, deviation: f64 },

    #[error("relative error is undefined for a zero reference tensor")]
    ZeroReference,

    #[error("input must be nonnegative (entry at flat offset {0} is negative)")]
    NegativeInput(usize),

    #[error("t-DEIM pairing as printed is inconsistent here: pick {pick} exceeds the {extent} sampled indices")]
    DeimPairingOutOfRange { pick: usize, extent: usize },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
