//! Synthetic coseparable tensor generation.
//!
//! Builds `A = Π1 * max{0, D_r * [[S, S*H], [M*S, M*S*H]] * D_c + N} * Π2`:
//! uniform `[0,1]` blocks, Sinkhorn scaling driving every horizontal
//! and lateral slice sum to a common target, Gaussian noise normalized
//! to a fraction of the scaled tensor's norm, and random first-slice
//! permutations applied through the t-product. Draw order per seed is
//! fixed (S, M, H, noise, row permutation, column permutation), so a
//! seed pins the output bit for bit.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::tensor::{tprod, IndexList, Mode, Tensor3};

/// Parameters of one synthetic tensor.
#[derive(Clone, Debug)]
pub struct SynthSpec {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub r1: usize,
    pub r2: usize,
    /// Noise level: `‖N‖_F = noise · ‖A_scale‖_F`.
    pub noise: f64,
    /// Common slice-sum target for both modes.
    pub slice_sum: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(m: usize, n: usize, p: usize, r1: usize, r2: usize, seed: u64) -> Self {
        Self { m, n, p, r1, r2, noise: 0.0, slice_sum: 100.0, seed }
    }
}

/// What the generator knows that a selector has to find.
#[derive(Clone, Debug)]
pub struct GroundTruth {
    pub i: IndexList,
    pub j: IndexList,
    /// The tensor before noise (same permutations applied).
    pub noiseless: Tensor3,
}

#[derive(Clone, Debug)]
pub struct SynthOutput {
    pub tensor: Tensor3,
    pub truth: GroundTruth,
}

const SINKHORN_MAX_ROUNDS: usize = 500;
const SINKHORN_TOL: f64 = 1e-8;

/// Alternating diagonal scaling driving all row and column sums of the
/// positive matrix `totals` to `target`.
fn sinkhorn(totals: &ndarray::Array2<f64>, target: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let (m, n) = totals.dim();
    let mut dr = vec![1.0; m];
    let mut dc = vec![1.0; n];
    let mut deviation = f64::INFINITY;
    for _ in 0..SINKHORN_MAX_ROUNDS {
        for (i, dri) in dr.iter_mut().enumerate() {
            let s: f64 = (0..n).map(|j| totals[[i, j]] * dc[j]).sum();
            if s <= 0.0 {
                return Err(Error::InvalidDistribution(
                    "zero slice sum; cannot balance".into(),
                ));
            }
            *dri = target / s;
        }
        for (j, dcj) in dc.iter_mut().enumerate() {
            let s: f64 = (0..m).map(|i| dr[i] * totals[[i, j]]).sum();
            if s <= 0.0 {
                return Err(Error::InvalidDistribution(
                    "zero slice sum; cannot balance".into(),
                ));
            }
            *dcj = target / s;
        }
        deviation = 0.0f64;
        for i in 0..m {
            let s: f64 = (0..n).map(|j| dr[i] * totals[[i, j]] * dc[j]).sum();
            deviation = deviation.max((s - target).abs());
        }
        for j in 0..n {
            let s: f64 = (0..m).map(|i| dr[i] * totals[[i, j]] * dc[j]).sum();
            deviation = deviation.max((s - target).abs());
        }
        if deviation <= SINKHORN_TOL {
            return Ok((dr, dc));
        }
    }
    Err(Error::SinkhornNonConvergence { rounds: SINKHORN_MAX_ROUNDS, deviation })
}

fn uniform_tensor(m: usize, n: usize, p: usize, rng: &mut ChaCha8Rng) -> Tensor3 {
    Tensor3::from_fn(m, n, p, |_, _, _| rng.gen::<f64>())
}

/// First-slice permutation tensor sending old row `perm[i]` to row `i`.
fn row_permutation_tensor(perm: &[usize], p: usize) -> Tensor3 {
    let m = perm.len();
    let mut t = Tensor3::zeros(m, m, p);
    for (i, &src) in perm.iter().enumerate() {
        t.set(i, src, 0, 1.0);
    }
    t
}

/// First-slice permutation tensor sending old column `perm[j]` to column `j`.
fn col_permutation_tensor(perm: &[usize], p: usize) -> Tensor3 {
    let n = perm.len();
    let mut t = Tensor3::zeros(n, n, p);
    for (j, &src) in perm.iter().enumerate() {
        t.set(src, j, 0, 1.0);
    }
    t
}

/// Generates one noisy coseparable tensor with its ground truth.
///
/// Balancing all slice sums of both modes to one target requires
/// `m == n` (the two mode totals must agree); other shapes are
/// rejected up front.
pub fn gen_synthetic(spec: &SynthSpec) -> Result<SynthOutput> {
    let SynthSpec { m, n, p, r1, r2, noise, slice_sum, seed } = *spec;
    if r1 == 0 || r1 > m || r2 == 0 || r2 > n || p == 0 {
        return Err(Error::DimensionMismatch(format!(
            "generator sizes ({r1}, {r2}) outside 1..={m} × 1..={n}"
        )));
    }
    if m != n {
        return Err(Error::DimensionMismatch(format!(
            "slice-sum balancing requires m == n, got {m} != {n}"
        )));
    }
    if noise < 0.0 || !noise.is_finite() || slice_sum <= 0.0 {
        return Err(Error::DimensionMismatch(
            "noise must be finite and nonnegative, slice_sum positive".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = uniform_tensor(r1, r2, p, &mut rng);
    let m_block = if m > r1 { Some(uniform_tensor(m - r1, r1, p, &mut rng)) } else { None };
    let h_block = if n > r2 { Some(uniform_tensor(r2, n - r2, p, &mut rng)) } else { None };

    let sh = h_block.as_ref().map(|h| tprod(&s, h)).transpose()?;
    let ms = m_block.as_ref().map(|mb| tprod(mb, &s)).transpose()?;
    let msh = match (&ms, &h_block) {
        (Some(ms), Some(h)) => Some(tprod(ms, h)?),
        _ => None,
    };
    let assembled = Tensor3::from_fn(m, n, p, |i, j, k| match (i < r1, j < r2) {
        (true, true) => s.get(i, j, k),
        (true, false) => sh.as_ref().expect("n > r2").get(i, j - r2, k),
        (false, true) => ms.as_ref().expect("m > r1").get(i - r1, j, k),
        (false, false) => msh.as_ref().expect("both blocks").get(i - r1, j - r2, k),
    });

    // Sinkhorn balancing of both mode sums; the scaling is exactly the
    // t-product with first-slice-only f-diagonal tensors.
    let mut totals = ndarray::Array2::<f64>::zeros((m, n));
    for k in 0..p {
        totals += &assembled.frontal_slice(k);
    }
    let (dr, dc) = sinkhorn(&totals, slice_sum)?;
    let scaled = Tensor3::from_fn(m, n, p, |i, j, k| dr[i] * assembled.get(i, j, k) * dc[j]);

    let noisy = if noise > 0.0 {
        let raw = Tensor3::from_fn(m, n, p, |_, _, _| rng.sample::<f64, _>(StandardNormal));
        let factor = noise * scaled.fro_norm() / raw.fro_norm();
        scaled.add(&raw.scale(factor))?.max_scalar(0.0)
    } else {
        scaled.clone()
    };

    let mut row_perm: Vec<usize> = (0..m).collect();
    row_perm.shuffle(&mut rng);
    let mut col_perm: Vec<usize> = (0..n).collect();
    col_perm.shuffle(&mut rng);
    let pi1 = row_permutation_tensor(&row_perm, p);
    let pi2 = col_permutation_tensor(&col_perm, p);

    let tensor = tprod(&tprod(&pi1, &noisy)?, &pi2)?.max_scalar(0.0);
    let noiseless = tprod(&tprod(&pi1, &scaled)?, &pi2)?.max_scalar(0.0);

    let i_star: Vec<usize> = (0..m).filter(|&i| row_perm[i] < r1).collect();
    let j_star: Vec<usize> = (0..n).filter(|&j| col_perm[j] < r2).collect();
    Ok(SynthOutput {
        tensor,
        truth: GroundTruth {
            i: IndexList::new_distinct(Mode::Horizontal, i_star, m)?,
            j: IndexList::new_distinct(Mode::Lateral, j_star, n)?,
            noiseless,
        },
    })
}
