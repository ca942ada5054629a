//! Dense third-order tensors and the t-product algebra.
//!
//! A [`Tensor3`] is an `m×n×p` real tensor. Entries are addressed as
//! `(i, j, k)` = (row, column, frontal slice), 0-based in this API; file
//! formats and the CLI speak 1-based. Storage is slice-major (`k`
//! outermost) and row-major within each frontal slice, so `unfold` and
//! the on-disk layout are the identity on the underlying buffer.
//!
//! The t-product `a * b` multiplies the block-circulant matrix of `a`
//! with the unfolding of `b`; it is evaluated in the Fourier domain
//! (one matrix product per spectral slice) which is algebraically the
//! same thing.

use ndarray::{Array2, Array3, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::spectral::{dft3, idft3_real_checked};

/// Tensor mode named by the slices an index list selects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Indexes horizontal slices `A(i, :, :)`, i.e. the first mode.
    Horizontal,
    /// Indexes lateral slices `A(:, j, :)`, i.e. the second mode.
    Lateral,
}

/// Ordered list of 0-based indices into one tensor mode.
///
/// Duplicates are permitted (sampling with replacement produces them);
/// selection outputs use [`IndexList::new_distinct`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexList {
    mode: Mode,
    indices: Vec<usize>,
}

impl IndexList {
    /// Builds a list after checking every index against the mode extent.
    pub fn new(mode: Mode, indices: Vec<usize>, extent: usize) -> Result<Self> {
        for &ix in &indices {
            if ix >= extent {
                return Err(Error::IndexOutOfRange { index: ix, extent });
            }
        }
        Ok(Self { mode, indices })
    }

    /// Like [`IndexList::new`] but rejects duplicate entries.
    pub fn new_distinct(mode: Mode, indices: Vec<usize>, extent: usize) -> Result<Self> {
        let mut seen = vec![false; extent];
        for &ix in &indices {
            if ix >= extent {
                return Err(Error::IndexOutOfRange { index: ix, extent });
            }
            if seen[ix] {
                return Err(Error::DuplicateIndex(ix));
            }
            seen[ix] = true;
        }
        Ok(Self { mode, indices })
    }

    /// Builds from 1-based indices as used by files and the CLI.
    pub fn from_one_based(mode: Mode, one_based: &[usize], extent: usize) -> Result<Self> {
        let mut indices = Vec::with_capacity(one_based.len());
        for &ix in one_based {
            if ix == 0 || ix > extent {
                return Err(Error::IndexOutOfRange { index: ix, extent });
            }
            indices.push(ix - 1);
        }
        Ok(Self { mode, indices })
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.indices.iter().map(|&i| i + 1).collect()
    }

    /// Same indices tagged with the other mode (used when a DEIM pick over
    /// one factor is applied to the opposite mode of the source tensor).
    pub fn with_mode(&self, mode: Mode) -> IndexList {
        IndexList { mode, indices: self.indices.clone() }
    }
}

/// Dense real `m×n×p` tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3 {
    /// Shape `[p, m, n]`: frontal slice index is the outermost axis.
    data: Array3<f64>,
}

impl Tensor3 {
    /// Builds a tensor from entries in storage order (slice-major,
    /// row-major within each slice). Rejects non-finite entries.
    pub fn new(m: usize, n: usize, p: usize, data: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 || p == 0 {
            return Err(Error::DimensionMismatch(format!(
                "tensor dimensions must be positive, got {m}x{n}x{p}"
            )));
        }
        if data.len() != m * n * p {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for a {m}x{n}x{p} tensor, got {}",
                m * n * p,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        let data = Array3::from_shape_vec((p, m, n), data)
            .expect("shape checked above");
        Ok(Self { data })
    }

    pub fn zeros(m: usize, n: usize, p: usize) -> Self {
        Self { data: Array3::zeros((p, m, n)) }
    }

    /// Entry-wise construction; `f` receives 0-based `(i, j, k)`.
    pub fn from_fn(m: usize, n: usize, p: usize, mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        Self {
            data: Array3::from_shape_fn((p, m, n), |(k, i, j)| f(i, j, k)),
        }
    }

    /// Stacks frontal slices `A(:,:,1), ..., A(:,:,p)`.
    pub fn from_frontal_slices(slices: &[Array2<f64>]) -> Result<Self> {
        if slices.is_empty() {
            return Err(Error::DimensionMismatch("no frontal slices given".into()));
        }
        let (m, n) = slices[0].dim();
        for s in slices {
            if s.dim() != (m, n) {
                return Err(Error::DimensionMismatch(format!(
                    "frontal slices disagree: {:?} vs {:?}",
                    (m, n),
                    s.dim()
                )));
            }
        }
        let p = slices.len();
        let mut t = Self::zeros(m, n, p);
        for (k, s) in slices.iter().enumerate() {
            t.data.index_axis_mut(Axis(0), k).assign(s);
        }
        Ok(t)
    }

    /// Identity tensor: first frontal slice `I_n`, remaining slices zero.
    pub fn identity(n: usize, p: usize) -> Self {
        let mut t = Self::zeros(n, n, p);
        for i in 0..n {
            t.data[[0, i, i]] = 1.0;
        }
        t
    }

    /// `(m, n, p)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        let (p, m, n) = self.data.dim();
        (m, n, p)
    }

    pub fn nrows(&self) -> usize {
        self.data.dim().1
    }

    pub fn ncols(&self) -> usize {
        self.data.dim().2
    }

    pub fn nslices(&self) -> usize {
        self.data.dim().0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[[k, i, j]]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[[k, i, j]] = v;
    }

    pub fn frontal_slice(&self, k: usize) -> ArrayView2<'_, f64> {
        self.data.index_axis(Axis(0), k)
    }

    /// Entries in storage order.
    pub fn as_slice(&self) -> &[f64] {
        self.data.as_slice().expect("Tensor3 storage is contiguous")
    }

    /// Tube fiber `A(i, j, :)` of length `p`.
    pub fn tube(&self, i: usize, j: usize) -> Vec<f64> {
        (0..self.nslices()).map(|k| self.get(i, j, k)).collect()
    }

    /// Vertical stack of the frontal slices, an `mp × n` matrix.
    pub fn unfold(&self) -> Array2<f64> {
        let (m, n, p) = self.dims();
        Array2::from_shape_vec((m * p, n), self.as_slice().to_vec())
            .expect("unfold preserves the element count")
    }

    /// Inverse of [`Tensor3::unfold`]; `mat` must have `p·m` rows.
    pub fn fold(mat: &Array2<f64>, p: usize) -> Result<Self> {
        let (rows, n) = mat.dim();
        if p == 0 || rows % p != 0 {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold a {rows}x{n} matrix into {p} frontal slices"
            )));
        }
        let m = rows / p;
        let std = mat.as_standard_layout();
        Self::new(m, n, p, std.as_slice().expect("standard layout").to_vec())
    }

    /// Block-circulant matrix: block `(r, c)` is frontal slice `(r - c) mod p`.
    pub fn bcirc(&self) -> Array2<f64> {
        let (m, n, p) = self.dims();
        let mut out = Array2::zeros((m * p, n * p));
        for br in 0..p {
            for bc in 0..p {
                let k = (br + p - bc) % p;
                let slice = self.frontal_slice(k);
                out.slice_mut(ndarray::s![br * m..(br + 1) * m, bc * n..(bc + 1) * n])
                    .assign(&slice);
            }
        }
        out
    }

    /// Tensor transpose: slice 1 transposed, slice `k` maps to transposed
    /// slice `p-k+2` (1-based), so `(a*b)ᵀ = bᵀ*aᵀ`.
    pub fn transpose(&self) -> Tensor3 {
        let (m, n, p) = self.dims();
        let mut out = Self::zeros(n, m, p);
        for k in 0..p {
            let src = if k == 0 { 0 } else { p - k };
            let slice = self.frontal_slice(src);
            out.data
                .index_axis_mut(Axis(0), k)
                .assign(&slice.t());
        }
        out
    }

    pub fn fro_norm(&self) -> f64 {
        self.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Squared Frobenius norms of the horizontal slices `A(i, :, :)`.
    pub fn horizontal_norms_sq(&self) -> Vec<f64> {
        let (m, _, p) = self.dims();
        let mut out = vec![0.0; m];
        for k in 0..p {
            let slice = self.frontal_slice(k);
            for (i, row) in slice.rows().into_iter().enumerate() {
                out[i] += row.iter().map(|v| v * v).sum::<f64>();
            }
        }
        out
    }

    /// Squared Frobenius norms of the lateral slices `A(:, j, :)`.
    pub fn lateral_norms_sq(&self) -> Vec<f64> {
        let (_, n, p) = self.dims();
        let mut out = vec![0.0; n];
        for k in 0..p {
            let slice = self.frontal_slice(k);
            for (j, col) in slice.columns().into_iter().enumerate() {
                out[j] += col.iter().map(|v| v * v).sum::<f64>();
            }
        }
        out
    }

    /// `A(I, J, :)` with rows and columns taken in listed order; `None`
    /// keeps a mode whole. Duplicated indices are reproduced.
    pub fn subtensor(&self, rows: Option<&IndexList>, cols: Option<&IndexList>) -> Result<Tensor3> {
        let (m, n, p) = self.dims();
        if let Some(r) = rows {
            if r.mode() != Mode::Horizontal {
                return Err(Error::ModeMismatch { expected: Mode::Horizontal, found: r.mode() });
            }
            if let Some(&bad) = r.indices().iter().find(|&&i| i >= m) {
                return Err(Error::IndexOutOfRange { index: bad, extent: m });
            }
        }
        if let Some(c) = cols {
            if c.mode() != Mode::Lateral {
                return Err(Error::ModeMismatch { expected: Mode::Lateral, found: c.mode() });
            }
            if let Some(&bad) = c.indices().iter().find(|&&j| j >= n) {
                return Err(Error::IndexOutOfRange { index: bad, extent: n });
            }
        }
        let all_rows: Vec<usize>;
        let row_ix: &[usize] = match rows {
            Some(r) => r.indices(),
            None => {
                all_rows = (0..m).collect();
                &all_rows
            }
        };
        let all_cols: Vec<usize>;
        let col_ix: &[usize] = match cols {
            Some(c) => c.indices(),
            None => {
                all_cols = (0..n).collect();
                &all_cols
            }
        };
        let mut out = Self::zeros(row_ix.len().max(1), col_ix.len().max(1), p);
        if row_ix.is_empty() || col_ix.is_empty() {
            return Err(Error::DimensionMismatch("empty subtensor selection".into()));
        }
        for k in 0..p {
            for (oi, &i) in row_ix.iter().enumerate() {
                for (oj, &j) in col_ix.iter().enumerate() {
                    out.data[[k, oi, oj]] = self.data[[k, i, j]];
                }
            }
        }
        Ok(out)
    }

    /// `A(I, :, :)`.
    pub fn horizontal_subtensor(&self, rows: &IndexList) -> Result<Tensor3> {
        self.subtensor(Some(rows), None)
    }

    /// `A(:, J, :)`.
    pub fn lateral_subtensor(&self, cols: &IndexList) -> Result<Tensor3> {
        self.subtensor(None, Some(cols))
    }

    pub fn add(&self, rhs: &Tensor3) -> Result<Tensor3> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Tensor3) -> Result<Tensor3> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &Tensor3, f: impl Fn(f64, f64) -> f64) -> Result<Tensor3> {
        if self.dims() != rhs.dims() {
            return Err(Error::DimensionMismatch(format!(
                "{:?} vs {:?}",
                self.dims(),
                rhs.dims()
            )));
        }
        Ok(Tensor3 { data: ndarray::Zip::from(&self.data).and(&rhs.data).map_collect(|&a, &b| f(a, b)) })
    }

    pub fn scale(&self, s: f64) -> Tensor3 {
        Tensor3 { data: &self.data * s }
    }

    /// Entry-wise `max(v, floor)`; `clip_at_zero` is `max(0, ·)`.
    pub fn max_scalar(&self, floor: f64) -> Tensor3 {
        Tensor3 { data: self.data.mapv(|v| v.max(floor)) }
    }

    pub fn min_entry(&self) -> f64 {
        self.as_slice().iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.as_slice().iter().all(|&v| v >= 0.0)
    }
}

/// `‖a − b‖_F`, errors on shape mismatch.
pub fn diff_fro_norm(a: &Tensor3, b: &Tensor3) -> Result<f64> {
    Ok(a.sub(b)?.fro_norm())
}

/// Tensor t-product `a * b`, evaluated per spectral slice.
///
/// The imaginary residue of the inverse transform is asserted below
/// [`crate::spectral::DFT_TOL`] relative to the result and discarded.
pub fn tprod(a: &Tensor3, b: &Tensor3) -> Result<Tensor3> {
    let (_, an, ap) = a.dims();
    let (bm, _, bp) = b.dims();
    if an != bm || ap != bp {
        return Err(Error::DimensionMismatch(format!(
            "t-product needs m×n×p by n×q×p, got {:?} by {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let sa = dft3(a);
    let sb = dft3(b);
    let sc = sa.slicewise_matmul(&sb)?;
    Ok(idft3_real_checked(&sc))
}
