//! One-sided Jacobi SVD for complex matrices.
//!
//! Works on the columns of a copy of the input: unitary plane rotations
//! are applied on the right until all column pairs are orthogonal, then
//! the column norms are the singular values. Runs on the conjugate
//! transpose when the input is wide. Every primitive used here maps
//! conjugated input to exactly conjugated output, so the SVDs of the
//! mirrored spectral slices of a real tensor stay mirror images of each
//! other down to the last bit.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative off-diagonal threshold below which a rotation is skipped.
const ROTATION_TOL: f64 = 1e-14;
/// Sweep cap before giving up.
const MAX_SWEEPS: usize = 60;

/// Full SVD `M = U · diag(σ) · Vᴴ` with unitary `U` (m×m), `V` (n×n)
/// and `σ` nonincreasing of length `min(m, n)`.
#[derive(Clone, Debug)]
pub struct ComplexSvd {
    pub u: Array2<Complex64>,
    pub sigma: Vec<f64>,
    pub v: Array2<Complex64>,
}

/// Column-major working copy.
struct Cols {
    m: usize,
    n: usize,
    data: Vec<Complex64>,
}

impl Cols {
    fn from_view(mat: &ArrayView2<'_, Complex64>) -> Self {
        let (m, n) = mat.dim();
        let mut data = vec![Complex64::default(); m * n];
        for j in 0..n {
            for i in 0..m {
                data[j * m + i] = mat[[i, j]];
            }
        }
        Self { m, n, data }
    }

    fn identity(n: usize) -> Self {
        let mut c = Self { m: n, n, data: vec![Complex64::default(); n * n] };
        for i in 0..n {
            c.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        c
    }

    #[inline]
    fn col(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.m..(j + 1) * self.m]
    }

    /// Applies the rotation `[c, s·ph; -s·conj(ph), c]` to columns `(i, j)`.
    fn rotate(&mut self, i: usize, j: usize, c: f64, s: f64, ph: Complex64) {
        let m = self.m;
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let (head, tail) = self.data.split_at_mut(hi * m);
        let (ci, cj) = if i < j {
            (&mut head[lo * m..lo * m + m], &mut tail[..m])
        } else {
            (&mut tail[..m], &mut head[lo * m..lo * m + m])
        };
        let ph_conj = ph.conj();
        for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
            let xv = *x;
            let yv = *y;
            *x = xv * c - yv * (ph_conj * s);
            *y = xv * (ph * s) + yv * c;
        }
    }
}

/// Orthogonality state of one column pair.
struct PairGram {
    alpha: f64,
    beta: f64,
    gamma: Complex64,
}

fn pair_gram(ci: &[Complex64], cj: &[Complex64]) -> PairGram {
    let mut alpha = 0.0;
    let mut beta = 0.0;
    let mut gamma = Complex64::default();
    for (x, y) in ci.iter().zip(cj.iter()) {
        alpha += x.norm_sqr();
        beta += y.norm_sqr();
        gamma += x.conj() * y;
    }
    PairGram { alpha, beta, gamma }
}

/// Runs sweeps until no pair needs rotating; returns the final working
/// columns and, when requested, the accumulated right factor.
fn jacobi_sweeps(a: &mut Cols, accumulate_v: bool) -> Result<Option<Cols>> {
    let n = a.n;
    let mut v = if accumulate_v { Some(Cols::identity(n)) } else { None };
    if n < 2 {
        return Ok(v);
    }
    let mut worst = 0.0f64;
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        worst = 0.0;
        // columns that have collapsed to rounding noise cannot be made
        // mutually orthogonal in a relative sense; leave them alone
        let max_sq = (0..n)
            .map(|c| a.col(c).iter().map(|z| z.norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max);
        let negligible = max_sq * 1e-30;
        for i in 0..n - 1 {
            for j in i + 1..n {
                let g = pair_gram(a.col(i), a.col(j));
                if g.alpha <= negligible || g.beta <= negligible {
                    continue;
                }
                let scale = (g.alpha * g.beta).sqrt();
                let gn = g.gamma.norm();
                if scale == 0.0 || gn <= ROTATION_TOL * scale {
                    continue;
                }
                worst = worst.max(gn / scale);
                rotated = true;
                let ph = g.gamma / gn;
                let tau = (g.beta - g.alpha) / (2.0 * gn);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                a.rotate(i, j, c, s, ph);
                if let Some(vv) = v.as_mut() {
                    vv.rotate(i, j, c, s, ph);
                }
            }
        }
        if !rotated {
            return Ok(v);
        }
    }
    Err(Error::SvdNonConvergence { sweeps: MAX_SWEEPS, residual: worst })
}

fn column_norms(a: &Cols) -> Vec<f64> {
    (0..a.n)
        .map(|j| a.col(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// Descending stable order (ties keep the slice-local order).
fn sort_order(sigma: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).expect("finite singular values"));
    order
}

/// Completes orthonormal columns to a full unitary basis of C^m,
/// greedily taking the canonical basis vector with the largest residual.
fn complete_basis(cols: &mut Vec<Vec<Complex64>>, m: usize) {
    while cols.len() < m {
        let mut best: Option<(f64, Vec<Complex64>)> = None;
        for q in 0..m {
            let mut r = vec![Complex64::default(); m];
            r[q] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for c in cols.iter() {
                    let dot: Complex64 = c.iter().zip(r.iter()).map(|(u, x)| u.conj() * x).sum();
                    for (ri, ui) in r.iter_mut().zip(c.iter()) {
                        *ri -= dot * ui;
                    }
                }
            }
            let norm = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if best.as_ref().is_none_or(|(bn, _)| norm > *bn) {
                best = Some((norm, r));
            }
        }
        let (norm, mut r) = best.expect("m > 0");
        debug_assert!(norm > 1e-8, "degenerate basis completion");
        let inv = 1.0 / norm;
        for z in r.iter_mut() {
            *z *= inv;
        }
        cols.push(r);
    }
}

fn svd_tall(mat: &ArrayView2<'_, Complex64>) -> Result<ComplexSvd> {
    let (m, n) = mat.dim();
    debug_assert!(m >= n);
    let mut a = Cols::from_view(mat);
    let v = jacobi_sweeps(&mut a, true)?.expect("v accumulation requested");
    let norms = column_norms(&a);
    let order = sort_order(&norms);

    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u_cols: Vec<Vec<Complex64>> = Vec::with_capacity(m);
    for &j in &order {
        if norms[j] > 0.0 {
            let inv = 1.0 / norms[j];
            u_cols.push(a.col(j).iter().map(|z| z * inv).collect());
        }
    }
    complete_basis(&mut u_cols, m);

    let mut u = Array2::zeros((m, m));
    for (c, col) in u_cols.iter().enumerate() {
        for (r, z) in col.iter().enumerate() {
            u[[r, c]] = *z;
        }
    }
    let mut vm = Array2::zeros((n, n));
    for (c, &j) in order.iter().enumerate() {
        for r in 0..n {
            vm[[r, c]] = v.col(j)[r];
        }
    }
    Ok(ComplexSvd { u, sigma, v: vm })
}

/// Full SVD of a complex matrix. Fails only when the sweeps do not
/// converge, carrying the best remaining off-diagonal residual.
pub fn complex_svd(mat: &ArrayView2<'_, Complex64>) -> Result<ComplexSvd> {
    if let Some(pos) = mat.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let (m, n) = mat.dim();
    if m >= n {
        svd_tall(mat)
    } else {
        let herm = mat.t().mapv(|z| z.conj());
        let svd = svd_tall(&herm.view())?;
        Ok(ComplexSvd { u: svd.v, sigma: svd.sigma, v: svd.u })
    }
}

/// Singular values only (no factor accumulation), nonincreasing.
pub fn singular_values(mat: &ArrayView2<'_, Complex64>) -> Result<Vec<f64>> {
    if let Some(pos) = mat.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite(pos));
    }
    let (m, n) = mat.dim();
    let mut a = if m >= n {
        Cols::from_view(mat)
    } else {
        let herm = mat.t().mapv(|z| z.conj());
        Cols::from_view(&herm.view())
    };
    jacobi_sweeps(&mut a, false)?;
    let mut norms = column_norms(&a);
    norms.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
    Ok(norms)
}
