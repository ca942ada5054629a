//! Slice-wise Fourier-domain linear algebra: t-SVD, inverses and ranks.
//!
//! Every routine here transforms along the third mode, works one
//! spectral slice at a time, and transforms back. Only the first
//! `⌊p/2⌋+1` slices are factorized; the rest are exact conjugate
//! mirrors, which both halves the work and guarantees the assembled
//! factors are real.

use ndarray::{Array2, Array3, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{dft3, idft3_real_checked, SpectralTensor};
use crate::tensor::Tensor3;

pub use crate::jacobi::{complex_svd, singular_values, ComplexSvd};

/// Default relative tolerance deciding which singular values count as
/// nonzero; measured against the largest singular value of the whole
/// block-diagonal spectrum.
pub const RANK_TOL_DEFAULT: f64 = 1e-10;

/// t-SVD factors `A = W * Σ * Vᵀ` with orthogonal `W`, `V` and
/// f-diagonal `Σ` whose spectral diagonals are nonnegative and
/// nonincreasing slice by slice.
#[derive(Clone, Debug)]
pub struct TsvdFactors {
    pub w: Tensor3,
    pub sigma: Tensor3,
    pub v: Tensor3,
}

/// Rank notions of a tensor at a given tolerance.
#[derive(Clone, Debug, PartialEq)]
pub struct RankReport {
    /// Rank of each spectral slice.
    pub multirank: Vec<usize>,
    /// Number of nonzero singular tubes.
    pub tubalrank: usize,
    /// `‖A‖_F² / ‖A‖₂²`, a smooth lower proxy for the tubalrank.
    pub stable_rank: f64,
    /// Relative tolerance the counts were taken at.
    pub rank_tol: f64,
}

fn conj_svd(svd: &ComplexSvd) -> ComplexSvd {
    ComplexSvd {
        u: svd.u.mapv(|z| z.conj()),
        sigma: svd.sigma.clone(),
        v: svd.v.mapv(|z| z.conj()),
    }
}

/// Full SVD of every spectral slice, mirroring the conjugate half.
fn slice_svds(t: &Tensor3) -> Result<Vec<ComplexSvd>> {
    let (_, _, p) = t.dims();
    let s = dft3(t);
    let half = p / 2;
    let mut out: Vec<Option<ComplexSvd>> = (0..p).map(|_| None).collect();
    for (k, slot) in out.iter_mut().enumerate().take(half + 1) {
        *slot = Some(complex_svd(&s.slice(k))?);
    }
    for k in half + 1..p {
        let mirror = out[p - k].as_ref().expect("mirror slice computed");
        out[k] = Some(conj_svd(mirror));
    }
    Ok(out.into_iter().map(|o| o.expect("all slices filled")).collect())
}

/// Singular values of every spectral slice (mirrored halves share them).
fn slice_singular_values(t: &Tensor3) -> Result<Vec<Vec<f64>>> {
    let (_, _, p) = t.dims();
    let s = dft3(t);
    let half = p / 2;
    let mut out: Vec<Vec<f64>> = vec![Vec::new(); p];
    for (k, slot) in out.iter_mut().enumerate().take(half + 1) {
        *slot = singular_values(&s.slice(k))?;
    }
    for k in half + 1..p {
        out[k] = out[p - k].clone();
    }
    Ok(out)
}

/// Tensor spectral norm `‖A‖₂ = max_k σ_max(Â_k)`.
pub fn spectral_norm(t: &Tensor3) -> f64 {
    slice_singular_values(t)
        .expect("spectral norm of a finite tensor")
        .iter()
        .filter_map(|sv| sv.first().copied())
        .fold(0.0, f64::max)
}

/// t-SVD (per-slice SVD in the Fourier domain, assembled and
/// transformed back).
pub fn tsvd(t: &Tensor3) -> Result<TsvdFactors> {
    let (m, n, p) = t.dims();
    let svds = slice_svds(t)?;
    let mut w_hat = Array3::<Complex64>::zeros((p, m, m));
    let mut v_hat = Array3::<Complex64>::zeros((p, n, n));
    let mut s_hat = Array3::<Complex64>::zeros((p, m, n));
    for (k, svd) in svds.iter().enumerate() {
        w_hat.index_axis_mut(Axis(0), k).assign(&svd.u);
        v_hat.index_axis_mut(Axis(0), k).assign(&svd.v);
        let mut diag = s_hat.index_axis_mut(Axis(0), k);
        for (i, &sv) in svd.sigma.iter().enumerate() {
            diag[[i, i]] = Complex64::new(sv, 0.0);
        }
    }
    Ok(TsvdFactors {
        w: idft3_real_checked(&SpectralTensor::from_parts(w_hat)),
        sigma: idft3_real_checked(&SpectralTensor::from_parts(s_hat)),
        v: idft3_real_checked(&SpectralTensor::from_parts(v_hat)),
    })
}

/// Moore-Penrose inverse; singular values at or below
/// `rank_tol · σ_max(Â)` are treated as zero. Always defined.
pub fn tpinv(t: &Tensor3) -> Tensor3 {
    tpinv_with_tol(t, RANK_TOL_DEFAULT)
}

pub fn tpinv_with_tol(t: &Tensor3, rank_tol: f64) -> Tensor3 {
    let (m, n, p) = t.dims();
    let svds = slice_svds(t).expect("pseudoinverse of a finite tensor");
    let sigma_max = svds
        .iter()
        .filter_map(|s| s.sigma.first().copied())
        .fold(0.0, f64::max);
    let threshold = rank_tol * sigma_max;
    let mut out = Array3::<Complex64>::zeros((p, n, m));
    for (k, svd) in svds.iter().enumerate() {
        let mut pinv = Array2::<Complex64>::zeros((n, m));
        for (i, &sv) in svd.sigma.iter().enumerate() {
            if sv <= threshold {
                continue;
            }
            let inv = 1.0 / sv;
            for r in 0..n {
                let vr = svd.v[[r, i]] * inv;
                for c in 0..m {
                    pinv[[r, c]] += vr * svd.u[[c, i]].conj();
                }
            }
        }
        out.index_axis_mut(Axis(0), k).assign(&pinv);
    }
    idft3_real_checked(&SpectralTensor::from_parts(out))
}

/// Inverse of a square tensor; errors with the (1-based) offending
/// spectral slice when a slice is singular at `rank_tol`.
pub fn tinv(t: &Tensor3) -> Result<Tensor3> {
    tinv_with_tol(t, RANK_TOL_DEFAULT)
}

pub fn tinv_with_tol(t: &Tensor3, rank_tol: f64) -> Result<Tensor3> {
    let (m, n, p) = t.dims();
    if m != n {
        return Err(Error::DimensionMismatch(format!(
            "inverse needs a square tensor, got {m}x{n}x{p}"
        )));
    }
    let svds = slice_svds(t)?;
    let sigma_max = svds
        .iter()
        .filter_map(|s| s.sigma.first().copied())
        .fold(0.0, f64::max);
    let threshold = rank_tol * sigma_max;
    for (k, svd) in svds.iter().enumerate() {
        let min = svd.sigma.last().copied().unwrap_or(0.0);
        if min <= threshold {
            return Err(Error::SingularSlice { slice: k + 1 });
        }
    }
    let mut out = Array3::<Complex64>::zeros((p, n, n));
    for (k, svd) in svds.iter().enumerate() {
        let mut inv = Array2::<Complex64>::zeros((n, n));
        for (i, &sv) in svd.sigma.iter().enumerate() {
            let s_inv = 1.0 / sv;
            for r in 0..n {
                let vr = svd.v[[r, i]] * s_inv;
                for c in 0..n {
                    inv[[r, c]] += vr * svd.u[[c, i]].conj();
                }
            }
        }
        out.index_axis_mut(Axis(0), k).assign(&inv);
    }
    Ok(idft3_real_checked(&SpectralTensor::from_parts(out)))
}

/// Multirank, tubalrank and stable rank at a relative tolerance.
pub fn ranks(t: &Tensor3, rank_tol: f64) -> RankReport {
    let (_, _, p) = t.dims();
    let values = slice_singular_values(t).expect("ranks of a finite tensor");
    let sigma_max = values
        .iter()
        .filter_map(|sv| sv.first().copied())
        .fold(0.0, f64::max);
    let threshold = rank_tol * sigma_max;
    let multirank: Vec<usize> = values
        .iter()
        .map(|sv| sv.iter().filter(|&&s| s > threshold).count())
        .collect();
    // ‖Σ_ii:‖_F via Parseval on each singular tube.
    let tubes = values.iter().map(|sv| sv.len()).min().unwrap_or(0);
    let mut tubalrank = 0;
    for i in 0..tubes {
        let sq: f64 = values.iter().map(|sv| sv[i] * sv[i]).sum();
        if (sq / p as f64).sqrt() > threshold {
            tubalrank += 1;
        }
    }
    let fro = t.fro_norm();
    let stable_rank = if sigma_max > 0.0 {
        (fro / sigma_max).powi(2)
    } else {
        0.0
    };
    RankReport { multirank, tubalrank, stable_rank, rank_tol }
}
