//! Coseparable nonnegative tensor factorization under the tensor t-product.
//!
//! The crate provides, bottom to top:
//!
//! - t-product algebra on dense third-order tensors ([`tensor`], [`spectral`]);
//! - slice-wise Fourier-domain linear algebra: t-SVD, inverses, rank
//!   notions ([`linalg`]);
//! - randomized index selection: t-CUR sampling with uniform, slice-size
//!   and leverage-score distributions, plus t-DEIM refinement ([`sampling`]);
//! - the alternating coseparable-core selector built on a projected fast
//!   gradient method ([`fgm`], [`select`]);
//! - nonnegative factor recovery by alternating NNLS ([`nnls`], [`recover`]);
//! - a synthetic-data and experiment harness with file formats and PGM
//!   ingestion ([`synth`], [`sweep`], [`fileio`], [`img`]).
//!
//! All randomized routines take an explicit `u64` seed and are
//! bit-reproducible for a fixed seed: draws come from `ChaCha8Rng` and
//! standard-normal variates from `rand_distr`'s ziggurat sampler.

pub mod error;
pub mod fgm;
pub mod fileio;
pub mod img;
pub mod linalg;
pub mod nnls;
pub mod recover;
pub mod sampling;
pub mod select;
pub mod spectral;
pub mod sweep;
pub mod synth;
pub mod tensor;

mod jacobi;

pub use error::{Error, Result};
pub use fgm::{fgm_solve, snmf_fgm_select, FgmOutput, FgmParams, FgmProblem};
pub use linalg::{
    complex_svd, ranks, spectral_norm, tinv, tpinv, tsvd, ComplexSvd, RankReport, TsvdFactors,
    RANK_TOL_DEFAULT,
};
pub use nnls::{nnls_cd, NnlsOptions};
pub use recover::{recover_factors, reconstruct, rel_approx, rel_error, CosepModel, RecoverOptions};
pub use sampling::{
    build_distribution, tcur, tcur_deim_select, tdeim, DeimPairing, DistKind, SamplingDistribution,
    TcurDeimOptions, TcurResult, TdeimSelection,
};
pub use select::{
    cosntf_select, hybrid_select, CosntfOptions, SelectionResult, DELTA_REAL_DATA, DELTA_SYNTHETIC,
};
pub use spectral::{dft3, idft3, SpectralTensor, DFT_TOL};
pub use sweep::{
    default_noise_levels, means, run_sweep, write_csv, ExperimentRecord, MeanRecord, Method,
    SweepConfig,
};
pub use synth::{gen_synthetic, GroundTruth, SynthOutput, SynthSpec};
pub use tensor::{diff_fro_norm, tprod, IndexList, Mode, Tensor3};
