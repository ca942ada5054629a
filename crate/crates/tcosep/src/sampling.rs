//! Randomized index selection: t-CUR sampling and t-DEIM refinement.
//!
//! Three sampling distributions are supported — uniform, slice-size
//! (squared slice norms) and leverage scores from a truncated t-SVD.
//! `tcur` draws indices i.i.d. with replacement and deduplicates them
//! preserving first occurrence; `tdeim` greedily picks the rows whose
//! residual tubes are largest; `tcur_deim_select` chains the two to cut
//! an oversampled draw down to exactly `(r1, r2)` indices.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{tinv, tpinv, tsvd};
use crate::select::SelectionResult;
use crate::tensor::{tprod, IndexList, Mode, Tensor3};

/// Which weights a distribution carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistKind {
    Uniform,
    /// Weight proportional to the squared Frobenius norm of the slice.
    SliceSize,
    /// Weight `(1/r)·‖W(i, 1:r, :)‖_F²` (resp. `V` for the lateral mode).
    Leverage,
}

/// A probability distribution over one tensor mode.
#[derive(Clone, Debug)]
pub struct SamplingDistribution {
    kind: DistKind,
    mode: Mode,
    weights: Vec<f64>,
    cumulative: Vec<f64>,
}

impl SamplingDistribution {
    fn from_weights(kind: DistKind, mode: Mode, mut weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::InvalidDistribution(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution(
                "all weights are zero; nothing can be sampled".into(),
            ));
        }
        for w in weights.iter_mut() {
            *w /= total;
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for &w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        if let Some(last) = cumulative.last_mut() {
            *last = 1.0;
        }
        Ok(Self { kind, mode, weights, cumulative })
    }

    pub fn kind(&self) -> DistKind {
        self.kind
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Normalized weights (they sum to one).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// One draw by inverse-CDF lookup.
    fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let u: f64 = rng.gen();
        match self
            .cumulative
            .binary_search_by(|c| c.partial_cmp(&u).expect("finite cumulative weights"))
        {
            Ok(pos) => (pos + 1).min(self.len() - 1),
            Err(pos) => pos.min(self.len() - 1),
        }
    }
}

/// Builds the sampling distribution of a mode. `r` is the target
/// tubalrank and is required (and only used) for leverage scores.
///
/// Zero-norm slices get weight zero under slice-size and leverage
/// sampling; they carry no information.
pub fn build_distribution(
    t: &Tensor3,
    mode: Mode,
    kind: DistKind,
    r: Option<usize>,
) -> Result<SamplingDistribution> {
    let (m, n, _) = t.dims();
    let extent = match mode {
        Mode::Horizontal => m,
        Mode::Lateral => n,
    };
    let weights = match kind {
        DistKind::Uniform => vec![1.0; extent],
        DistKind::SliceSize => match mode {
            Mode::Horizontal => t.horizontal_norms_sq(),
            Mode::Lateral => t.lateral_norms_sq(),
        },
        DistKind::Leverage => {
            let r = r.ok_or_else(|| {
                Error::InvalidDistribution("leverage sampling needs a target tubalrank r".into())
            })?;
            if r == 0 || r > extent {
                return Err(Error::InvalidDistribution(format!(
                    "leverage rank r={r} outside 1..={extent}"
                )));
            }
            let factors = tsvd(t)?;
            let basis = match mode {
                Mode::Horizontal => factors.w,
                Mode::Lateral => factors.v,
            };
            let lead = IndexList::new(Mode::Lateral, (0..r).collect(), basis.ncols())?;
            let lead = basis.lateral_subtensor(&lead)?;
            let slice_norms = match mode {
                Mode::Horizontal => t.horizontal_norms_sq(),
                Mode::Lateral => t.lateral_norms_sq(),
            };
            lead.horizontal_norms_sq()
                .into_iter()
                .zip(slice_norms)
                .map(|(w, sn)| if sn > 0.0 { w / r as f64 } else { 0.0 })
                .collect()
        }
    };
    SamplingDistribution::from_weights(kind, mode, weights)
}

/// Draws `per_round` indices i.i.d. with replacement and keeps the
/// first occurrence of each; repeats (accumulating draws) until
/// `min_unique` distinct indices exist or `max_rounds` rounds are spent.
pub(crate) fn sample_dedup(
    dist: &SamplingDistribution,
    rng: &mut ChaCha8Rng,
    per_round: usize,
    min_unique: usize,
    max_rounds: usize,
) -> Result<Vec<usize>> {
    let mut seen = vec![false; dist.len()];
    let mut unique = Vec::new();
    for _ in 0..max_rounds {
        for _ in 0..per_round {
            let ix = dist.draw(rng);
            if !seen[ix] {
                seen[ix] = true;
                unique.push(ix);
            }
        }
        if unique.len() >= min_unique {
            return Ok(unique);
        }
    }
    Err(Error::SamplingExhausted { needed: min_unique, got: unique.len() })
}

/// t-CUR pieces: `C = A(:, J, :)`, `U = A(I, J, :)`, `R = A(I, :, :)`.
#[derive(Clone, Debug)]
pub struct TcurResult {
    pub c: Tensor3,
    pub u: Tensor3,
    pub r: Tensor3,
    pub i: IndexList,
    pub j: IndexList,
}

/// Randomized t-CUR: `d1` horizontal and `d2` lateral draws (with
/// replacement, deduplicated in first-occurrence order). Resamples up
/// to 10 rounds when fewer than `min_unique` distinct indices come out.
pub fn tcur(
    t: &Tensor3,
    d1: usize,
    d2: usize,
    dist_i: &SamplingDistribution,
    dist_j: &SamplingDistribution,
    seed: u64,
    min_unique: (usize, usize),
) -> Result<TcurResult> {
    let (m, n, _) = t.dims();
    if dist_i.mode() != Mode::Horizontal || dist_i.len() != m {
        return Err(Error::InvalidDistribution(format!(
            "horizontal distribution must cover {m} indices"
        )));
    }
    if dist_j.mode() != Mode::Lateral || dist_j.len() != n {
        return Err(Error::InvalidDistribution(format!(
            "lateral distribution must cover {n} indices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = sample_dedup(dist_i, &mut rng, d1.max(1), min_unique.0, 10)?;
    let cols = sample_dedup(dist_j, &mut rng, d2.max(1), min_unique.1, 10)?;
    let i = IndexList::new_distinct(Mode::Horizontal, rows, m)?;
    let j = IndexList::new_distinct(Mode::Lateral, cols, n)?;
    Ok(TcurResult {
        c: t.lateral_subtensor(&j)?,
        u: t.subtensor(Some(&i), Some(&j))?,
        r: t.horizontal_subtensor(&i)?,
        i,
        j,
    })
}

/// t-DEIM output: per-column row picks plus a flag recording whether a
/// singular running subtensor forced a pseudoinverse step.
#[derive(Clone, Debug)]
pub struct TdeimSelection {
    pub indices: IndexList,
    pub used_pinv_fallback: bool,
}

/// Greedy t-DEIM row selection over the columns of `u` (needs
/// `n ≤ m`). The residual of column `j` against the interpolation on
/// the previously picked rows vanishes at those rows, so the output is
/// duplicate-free; ties break toward the lowest index.
pub fn tdeim(u: &Tensor3) -> Result<TdeimSelection> {
    let (m, n, _p) = u.dims();
    if n > m {
        return Err(Error::DimensionMismatch(format!(
            "t-DEIM needs at most as many columns as rows, got {m}x{n}"
        )));
    }
    let mut picks: Vec<usize> = Vec::with_capacity(n);
    let mut chosen = vec![false; m];
    let mut used_pinv = false;
    let scale = 1.0 + u.fro_norm();

    for j in 0..n {
        let col = IndexList::new(Mode::Lateral, vec![j], n)?;
        let col_tensor = u.lateral_subtensor(&col)?;
        let mut amplification = 1.0;
        let residual = if j == 0 {
            col_tensor
        } else {
            let prev_rows = IndexList::new(Mode::Horizontal, picks.clone(), m)?;
            let prev_cols = IndexList::new(Mode::Lateral, (0..j).collect(), n)?;
            let running = u.subtensor(Some(&prev_rows), Some(&prev_cols))?;
            let rhs = u.subtensor(Some(&prev_rows), Some(&col))?;
            let coeff = match tinv(&running) {
                Ok(inv) => tprod(&inv, &rhs)?,
                Err(Error::SingularSlice { .. }) => {
                    used_pinv = true;
                    tprod(&tpinv(&running), &rhs)?
                }
                Err(e) => return Err(e),
            };
            let basis = u.lateral_subtensor(&prev_cols)?;
            let interp = tprod(&basis, &coeff)?;
            amplification += basis.fro_norm() * coeff.fro_norm();
            col_tensor.sub(&interp)?
        };
        let norms = residual.horizontal_norms_sq();
        if !used_pinv {
            // the interpolant matches the picked rows exactly up to the
            // rounding of the running inverse, which grows with the
            // interpolation coefficients
            for &prev in &picks {
                debug_assert!(
                    norms[prev].sqrt() <= 1e-8 * scale * amplification,
                    "residual {:.3e} at already-picked row {prev}",
                    norms[prev].sqrt()
                );
            }
        }
        // the residual vanishes at picked rows; skipping them only
        // matters in degenerate pseudoinverse fallbacks
        let mut best = None;
        for (ix, &sq) in norms.iter().enumerate() {
            if chosen[ix] {
                continue;
            }
            match best {
                None => best = Some((ix, sq)),
                Some((_, bs)) if sq > bs => best = Some((ix, sq)),
                _ => {}
            }
        }
        let (pick, _) = best.ok_or(Error::SamplingExhausted { needed: n, got: picks.len() })?;
        chosen[pick] = true;
        picks.push(pick);
    }
    Ok(TdeimSelection {
        indices: IndexList::new_distinct(Mode::Horizontal, picks, m)?,
        used_pinv_fallback: used_pinv,
    })
}

/// Which t-SVD factor feeds which index set in the t-CUR-DEIM chain.
///
/// `Swapped` (the default) sends the DEIM picks over `W` to the
/// horizontal set and those over `V` to the lateral set, which is
/// always well-defined. `AsPrinted` is the transposed pairing; it can
/// ask for a sampled index beyond the set it is applied to whenever the
/// two sampled sets have different sizes, in which case it errors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DeimPairing {
    #[default]
    Swapped,
    AsPrinted,
}

/// Options for [`tcur_deim_select`].
#[derive(Clone, Debug)]
pub struct TcurDeimOptions {
    pub dist: DistKind,
    pub pairing: DeimPairing,
}

impl Default for TcurDeimOptions {
    fn default() -> Self {
        Self { dist: DistKind::Uniform, pairing: DeimPairing::default() }
    }
}

/// Oversampled draw count `min(dim, max(r, ⌈r·ln(dim)⌉))`.
pub(crate) fn oversample_count(r: usize, dim: usize) -> usize {
    let by_log = (r as f64 * (dim as f64).ln()).ceil() as usize;
    by_log.max(r).min(dim)
}

/// t-CUR-DEIM selection: oversample `⌈r1·ln m⌉ × ⌈r2·ln n⌉` indices,
/// t-SVD the intersection, and keep the first `r1`/`r2` DEIM picks.
pub fn tcur_deim_select(
    t: &Tensor3,
    r1: usize,
    r2: usize,
    seed: u64,
    opts: &TcurDeimOptions,
) -> Result<SelectionResult> {
    let (m, n, _) = t.dims();
    if r1 == 0 || r1 > m || r2 == 0 || r2 > n {
        return Err(Error::DimensionMismatch(format!(
            "target sizes ({r1}, {r2}) outside 1..={m} × 1..={n}"
        )));
    }
    let d1 = oversample_count(r1, m);
    let d2 = oversample_count(r2, n);
    let dist_i = build_distribution(t, Mode::Horizontal, opts.dist, Some(r1))?;
    let dist_j = build_distribution(t, Mode::Lateral, opts.dist, Some(r2))?;
    let cur = tcur(t, d1, d2, &dist_i, &dist_j, seed, (r1, r2))?;
    let factors = tsvd(&cur.u)?;

    let take = |deim: &TdeimSelection, from: &IndexList, count: usize| -> Result<Vec<usize>> {
        let picks = deim.indices.indices();
        if picks.len() < count {
            return Err(Error::SamplingExhausted { needed: count, got: picks.len() });
        }
        picks[..count]
            .iter()
            .map(|&pos| {
                from.indices().get(pos).copied().ok_or(Error::DeimPairingOutOfRange {
                    pick: pos + 1,
                    extent: from.len(),
                })
            })
            .collect()
    };

    let (rows, cols) = match opts.pairing {
        DeimPairing::Swapped => {
            let p_rows = tdeim(&factors.w)?;
            let q_cols = tdeim(&factors.v)?;
            (take(&p_rows, &cur.i, r1)?, take(&q_cols, &cur.j, r2)?)
        }
        DeimPairing::AsPrinted => {
            let p_rows = tdeim(&factors.v)?;
            let q_cols = tdeim(&factors.w)?;
            (take(&p_rows, &cur.i, r1)?, take(&q_cols, &cur.j, r2)?)
        }
    };
    Ok(SelectionResult {
        i: IndexList::new_distinct(Mode::Horizontal, rows, m)?,
        j: IndexList::new_distinct(Mode::Lateral, cols, n)?,
        outer_iterations: 1,
        converged: true,
        history: Vec::new(),
    })
}
