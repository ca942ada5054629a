//! Discrete Fourier transform along the third mode.
//!
//! The forward transform is unnormalized and the inverse carries the
//! `1/p` factor (MATLAB `fft`/`ifft` convention). A direct `O(p²)`
//! transform per tube is used; the third-mode extent stays small in
//! every workload this crate targets, and the twiddle table is built
//! with exact conjugate symmetry so spectra of real tensors satisfy
//! `Â_k = conj(Â_{p-k+2})` to the last bit.

use ndarray::{Array2, Array3, ArrayView2, Axis};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tensor::Tensor3;

/// Bound on the imaginary residue tolerated when a spectral tensor that
/// is known to come from real data is transformed back.
pub const DFT_TOL: f64 = 1e-10;

/// Frontal slices of a tensor after the DFT along mode 3.
#[derive(Clone, Debug)]
pub struct SpectralTensor {
    /// Shape `[p, m, n]`, mirroring [`Tensor3`] storage.
    slices: Array3<Complex64>,
}

impl SpectralTensor {
    pub(crate) fn from_parts(slices: Array3<Complex64>) -> Self {
        Self { slices }
    }

    /// `(m, n, p)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let (p, m, n) = self.slices.dim();
        (m, n, p)
    }

    /// Spectral frontal slice `Â_k` (0-based `k`).
    pub fn slice(&self, k: usize) -> ArrayView2<'_, Complex64> {
        self.slices.index_axis(Axis(0), k)
    }

    /// Sum over slices of squared Frobenius norms, `‖Â‖_F²`.
    pub fn fro_norm_sq(&self) -> f64 {
        self.slices.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Per-slice matrix product, the Fourier-domain half of the t-product.
    pub(crate) fn slicewise_matmul(&self, rhs: &SpectralTensor) -> Result<SpectralTensor> {
        let (m, n, p) = self.dims();
        let (rn, q, rp) = rhs.dims();
        if n != rn || p != rp {
            return Err(Error::DimensionMismatch(format!(
                "spectral product needs m×n×p by n×q×p, got {:?} by {:?}",
                self.dims(),
                rhs.dims()
            )));
        }
        let mut out = Array3::zeros((p, m, q));
        for k in 0..p {
            let prod = self.slice(k).dot(&rhs.slice(k));
            out.index_axis_mut(Axis(0), k).assign(&prod);
        }
        Ok(SpectralTensor { slices: out })
    }
}

/// Twiddle factors `ω^j`, `ω = e^{-2πi/p}`, with `ω^{p-j} = conj(ω^j)`
/// enforced exactly so conjugate symmetry of real-tensor spectra is
/// bit-exact rather than approximate.
pub(crate) fn twiddle_table(p: usize) -> Vec<Complex64> {
    let mut w = vec![Complex64::new(1.0, 0.0); p];
    let half = p / 2;
    for (j, slot) in w.iter_mut().enumerate().take(half + 1).skip(1) {
        let angle = -2.0 * std::f64::consts::PI * (j as f64) / (p as f64);
        *slot = Complex64::new(angle.cos(), angle.sin());
    }
    if p.is_multiple_of(2) && p >= 2 {
        w[half] = Complex64::new(-1.0, 0.0);
    }
    if p.is_multiple_of(4) {
        w[p / 4] = Complex64::new(0.0, -1.0);
    }
    for j in (half + 1)..p {
        w[j] = w[p - j].conj();
    }
    w
}

/// Unnormalized forward DFT along mode 3.
pub fn dft3(t: &Tensor3) -> SpectralTensor {
    let (m, n, p) = t.dims();
    let w = twiddle_table(p);
    let mut out = Array3::zeros((p, m, n));
    for l in 0..p {
        let mut acc = Array2::<Complex64>::zeros((m, n));
        for k in 0..p {
            let tw = w[(k * l) % p];
            let slice = t.frontal_slice(k);
            acc.zip_mut_with(&slice, |a, &v| *a += tw * v);
        }
        out.index_axis_mut(Axis(0), l).assign(&acc);
    }
    SpectralTensor { slices: out }
}

fn idft3_complex(s: &SpectralTensor) -> Array3<Complex64> {
    let (m, n, p) = s.dims();
    let w = twiddle_table(p);
    let scale = 1.0 / p as f64;
    let mut out = Array3::zeros((p, m, n));
    for k in 0..p {
        let mut acc = Array2::<Complex64>::zeros((m, n));
        for l in 0..p {
            // inverse kernel ω^{-kl} = conj(ω^{kl})
            let tw = w[(k * l) % p].conj();
            acc.zip_mut_with(&s.slice(l), |a, &v| *a += tw * v);
        }
        acc.mapv_inplace(|z| z * scale);
        out.index_axis_mut(Axis(0), k).assign(&acc);
    }
    out
}

/// Inverse DFT along mode 3, keeping the real part.
///
/// The imaginary residue is asserted below `DFT_TOL·(1 + ‖result‖_F)`;
/// a violation means the spectrum did not come from real data and is a
/// caller bug.
pub fn idft3(s: &SpectralTensor) -> Tensor3 {
    idft3_real_checked(s)
}

pub(crate) fn idft3_real_checked(s: &SpectralTensor) -> Tensor3 {
    let (m, n, p) = s.dims();
    let full = idft3_complex(s);
    let mut re = Vec::with_capacity(m * n * p);
    let mut imag_max: f64 = 0.0;
    let mut re_sq = 0.0;
    for z in full.iter() {
        imag_max = imag_max.max(z.im.abs());
        re_sq += z.re * z.re;
        re.push(z.re);
    }
    let bound = DFT_TOL * (1.0 + re_sq.sqrt());
    assert!(
        imag_max < bound,
        "imaginary residue {imag_max:.3e} exceeds {bound:.3e}; spectrum is not real-sourced"
    );
    Tensor3::new(m, n, p, re).expect("inverse DFT of finite spectrum is finite")
}
