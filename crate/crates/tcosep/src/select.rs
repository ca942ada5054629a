//! Alternating coseparable index selection.
//!
//! The selector alternates two self-dictionary solves: one over the
//! unfolded transpose (picking horizontal indices) and one over the
//! unfolding restricted to the current rows (picking lateral indices),
//! until the selected subtensors stop moving. The hybrid variant first
//! pre-samples an oversampled uniform subset of each mode and runs the
//! alternation on the subtensor only.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fgm::{snmf_fgm_select, FgmParams};
use crate::sampling::{build_distribution, oversample_count, sample_dedup, DistKind};
use crate::tensor::{diff_fro_norm, IndexList, Mode, Tensor3};

/// Stopping threshold used for the synthetic experiment profile.
pub const DELTA_SYNTHETIC: f64 = 1e-6;
/// Stopping threshold used for the real-data (image) profile.
pub const DELTA_REAL_DATA: f64 = 1e-2;

/// Knobs of the alternating selector.
#[derive(Clone, Debug)]
pub struct CosntfOptions {
    /// Stop when the selected subtensors move by less than this.
    pub delta: f64,
    /// Outer alternation cap.
    pub max_outer: usize,
    /// Inner fast-gradient settings (trace weight, iteration cap).
    pub fgm: FgmParams,
}

impl Default for CosntfOptions {
    fn default() -> Self {
        Self { delta: DELTA_SYNTHETIC, max_outer: 50, fgm: FgmParams::default() }
    }
}

impl CosntfOptions {
    /// Looser stopping threshold for approximately coseparable data.
    pub fn real_data_profile() -> Self {
        Self { delta: DELTA_REAL_DATA, ..Default::default() }
    }
}

/// Outcome of an index selection.
#[derive(Clone, Debug)]
pub struct SelectionResult {
    pub i: IndexList,
    pub j: IndexList,
    pub outer_iterations: usize,
    pub converged: bool,
    /// Stopping-criterion value after each outer iteration.
    pub history: Vec<f64>,
}

fn check_targets(t: &Tensor3, r1: usize, r2: usize) -> Result<()> {
    let (m, n, _) = t.dims();
    if r1 == 0 || r1 > m || r2 == 0 || r2 > n {
        return Err(Error::DimensionMismatch(format!(
            "target sizes ({r1}, {r2}) outside 1..={m} × 1..={n}"
        )));
    }
    if let Some(pos) = t.as_slice().iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeInput(pos));
    }
    Ok(())
}

/// Alternating selection of `r1` horizontal and `r2` lateral indices.
///
/// Non-convergence within the iteration cap is reported through
/// `converged = false`, not as an error.
pub fn cosntf_select(
    t: &Tensor3,
    r1: usize,
    r2: usize,
    opts: &CosntfOptions,
) -> Result<SelectionResult> {
    check_targets(t, r1, r2)?;
    let mut i = snmf_fgm_select(&t.transpose().unfold(), r1, Mode::Horizontal, &opts.fgm)?;
    let mut j = snmf_fgm_select(
        &t.horizontal_subtensor(&i)?.unfold(),
        r2,
        Mode::Lateral,
        &opts.fgm,
    )?;

    let mut history = Vec::new();
    let mut converged = false;
    let mut outer_iterations = 0;
    for it in 1..=opts.max_outer {
        outer_iterations = it;
        let rows_old = t.horizontal_subtensor(&i)?;
        let cols_old = t.lateral_subtensor(&j)?;
        i = snmf_fgm_select(
            &t.lateral_subtensor(&j)?.transpose().unfold(),
            r1,
            Mode::Horizontal,
            &opts.fgm,
        )?;
        j = snmf_fgm_select(&t.horizontal_subtensor(&i)?.unfold(), r2, Mode::Lateral, &opts.fgm)?;
        let crit = diff_fro_norm(&rows_old, &t.horizontal_subtensor(&i)?)?
            + diff_fro_norm(&cols_old, &t.lateral_subtensor(&j)?)?;
        history.push(crit);
        if crit <= opts.delta {
            converged = true;
            break;
        }
    }
    Ok(SelectionResult { i, j, outer_iterations, converged, history })
}

/// Pre-samples `⌈r1·ln m⌉` horizontal and `⌈r2·ln n⌉` lateral indices
/// uniformly (deduplicated, sorted), runs the alternating selector on
/// the subtensor, and maps the picks back to source coordinates.
pub fn hybrid_select(
    t: &Tensor3,
    r1: usize,
    r2: usize,
    seed: u64,
    opts: &CosntfOptions,
) -> Result<SelectionResult> {
    check_targets(t, r1, r2)?;
    let (m, n, _) = t.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist_i = build_distribution(t, Mode::Horizontal, DistKind::Uniform, None)?;
    let dist_j = build_distribution(t, Mode::Lateral, DistKind::Uniform, None)?;
    let mut pre_rows = sample_dedup(&dist_i, &mut rng, oversample_count(r1, m), r1, 10)?;
    let mut pre_cols = sample_dedup(&dist_j, &mut rng, oversample_count(r2, n), r2, 10)?;
    // sorted pre-samples keep "pre-sample = everything" literally equal
    // to running the full selector
    pre_rows.sort_unstable();
    pre_cols.sort_unstable();

    let rows = IndexList::new_distinct(Mode::Horizontal, pre_rows, m)?;
    let cols = IndexList::new_distinct(Mode::Lateral, pre_cols, n)?;
    let sub = t.subtensor(Some(&rows), Some(&cols))?;
    let inner = cosntf_select(&sub, r1, r2, opts)?;

    let mut mapped_rows: Vec<usize> =
        inner.i.indices().iter().map(|&pos| rows.indices()[pos]).collect();
    let mut mapped_cols: Vec<usize> =
        inner.j.indices().iter().map(|&pos| cols.indices()[pos]).collect();
    mapped_rows.sort_unstable();
    mapped_cols.sort_unstable();
    Ok(SelectionResult {
        i: IndexList::new_distinct(Mode::Horizontal, mapped_rows, m)?,
        j: IndexList::new_distinct(Mode::Lateral, mapped_cols, n)?,
        outer_iterations: inner.outer_iterations,
        converged: inner.converged,
        history: inner.history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recover::{recover_factors, reconstruct, rel_error, RecoverOptions};
    use crate::tensor::testdata::{cosep_example, rng_tensor};
    use crate::tensor::tprod;

    /// Small exactly co-(r1, r2)-separable tensor with generators at
    /// the leading indices.
    fn cosep_tensor(m: usize, n: usize, p: usize, r1: usize, r2: usize, seed: u64) -> Tensor3 {
        let s = rng_tensor(r1, r2, p, seed).max_scalar(0.0);
        let mmat = rng_tensor(m - r1, r1, p, seed + 1).max_scalar(0.0);
        let h = rng_tensor(r2, n - r2, p, seed + 2).max_scalar(0.0);
        let sh = tprod(&s, &h).unwrap();
        let ms = tprod(&mmat, &s).unwrap();
        let msh = tprod(&mmat, &sh).unwrap();
        // transform rounding can leave -1e-17 entries; clip them
        Tensor3::from_fn(m, n, p, |i, j, k| match (i < r1, j < r2) {
            (true, true) => s.get(i, j, k),
            (true, false) => sh.get(i, j - r2, k),
            (false, true) => ms.get(i - r1, j, k),
            (false, false) => msh.get(i - r1, j - r2, k),
        })
        .max_scalar(0.0)
    }

    #[test]
    fn full_targets_select_everything_in_one_outer_iteration() {
        let t = rng_tensor(4, 3, 2, 3).max_scalar(0.0);
        let res = cosntf_select(&t, 4, 3, &CosntfOptions::default()).unwrap();
        assert_eq!(res.i.indices(), &[0, 1, 2, 3]);
        assert_eq!(res.j.indices(), &[0, 1, 2]);
        assert!(res.converged);
        assert_eq!(res.outer_iterations, 1);
        assert_eq!(res.history.len(), 1);
        assert_eq!(res.history[0], 0.0);
    }

    #[test]
    fn recovers_generators_of_a_slice_sum_balanced_tensor() {
        // generation protocol: blocks, balancing, permutation
        let out = crate::synth::gen_synthetic(&crate::synth::SynthSpec::new(12, 12, 3, 3, 2, 7))
            .unwrap();
        let t = out.tensor;
        let res = cosntf_select(&t, 3, 2, &CosntfOptions::default()).unwrap();
        let model = recover_factors(&t, &res.i, &res.j, &RecoverOptions::default()).unwrap();
        let err = rel_error(&t, &reconstruct(&model)).unwrap();
        assert!(
            err <= 1e-6,
            "relative error {err:.3e} with I={:?} J={:?}",
            res.i.indices(),
            res.j.indices()
        );
    }

    #[test]
    fn worked_example_exceeds_the_matrix_relaxation() {
        // The worked 3×3×2 tensor is coseparable only through factors
        // with a nonzero second frontal slice (the redundant row is the
        // first row plus a cyclic shift of the second). The alternating
        // selector optimizes a first-slice (plain matrix) relaxation,
        // which cannot express that shift, so its converged ranking
        // keeps the third row/column instead of the second. Recovery at
        // the true index pair stays exact; enumeration shows no other
        // pair admits nonnegative factors.
        let a = cosep_example();
        let res = cosntf_select(&a, 2, 2, &CosntfOptions::default()).unwrap();
        assert!(res.converged);
        assert_eq!(res.i.indices(), &[0, 2]);
        assert_eq!(res.j.indices(), &[0, 2]);

        let mut exact_pairs = Vec::new();
        for rows in [[0usize, 1], [0, 2], [1, 2]] {
            for cols in [[0usize, 1], [0, 2], [1, 2]] {
                let i = IndexList::new_distinct(Mode::Horizontal, rows.to_vec(), 3).unwrap();
                let j = IndexList::new_distinct(Mode::Lateral, cols.to_vec(), 3).unwrap();
                let model = recover_factors(&a, &i, &j, &RecoverOptions::default()).unwrap();
                if rel_error(&a, &reconstruct(&model)).unwrap() <= 1e-6 {
                    exact_pairs.push((rows, cols));
                }
            }
        }
        assert_eq!(exact_pairs, vec![([0, 1], [0, 1])]);
    }

    #[test]
    fn rejects_negative_input_and_bad_targets() {
        let mut t = rng_tensor(3, 3, 2, 11).max_scalar(0.0);
        assert!(cosntf_select(&t, 4, 2, &CosntfOptions::default()).is_err());
        t.set(0, 0, 0, -1.0);
        assert!(matches!(
            cosntf_select(&t, 2, 2, &CosntfOptions::default()),
            Err(Error::NegativeInput(_))
        ));
    }

    #[test]
    fn hybrid_with_full_cover_matches_plain_selection() {
        let out = crate::synth::gen_synthetic(&crate::synth::SynthSpec::new(4, 4, 2, 3, 3, 13))
            .unwrap();
        let t = out.tensor;
        // seed 13 makes the oversampled pre-draw cover every index of
        // both modes; verify that before relying on it
        let seed = 13u64;
        {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let d = crate::sampling::build_distribution(&t, Mode::Horizontal, DistKind::Uniform, None)
                .unwrap();
            let rows =
                crate::sampling::sample_dedup(&d, &mut rng, oversample_count(3, 4), 3, 10).unwrap();
            let d = crate::sampling::build_distribution(&t, Mode::Lateral, DistKind::Uniform, None)
                .unwrap();
            let cols =
                crate::sampling::sample_dedup(&d, &mut rng, oversample_count(3, 4), 3, 10).unwrap();
            let mut rs = rows.clone();
            rs.sort_unstable();
            let mut cs = cols.clone();
            cs.sort_unstable();
            assert_eq!(rs, vec![0, 1, 2, 3], "seed no longer covers all rows");
            assert_eq!(cs, vec![0, 1, 2, 3], "seed no longer covers all columns");
        }
        let plain = cosntf_select(&t, 3, 3, &CosntfOptions::default()).unwrap();
        let hybrid = hybrid_select(&t, 3, 3, seed, &CosntfOptions::default()).unwrap();
        let mut plain_i = plain.i.indices().to_vec();
        plain_i.sort_unstable();
        let mut plain_j = plain.j.indices().to_vec();
        plain_j.sort_unstable();
        assert_eq!(hybrid.i.indices(), plain_i.as_slice());
        assert_eq!(hybrid.j.indices(), plain_j.as_slice());
    }

    #[test]
    fn hybrid_is_deterministic_per_seed() {
        let t = cosep_tensor(12, 11, 2, 3, 2, 17);
        let a = hybrid_select(&t, 3, 2, 42, &CosntfOptions::default()).unwrap();
        let b = hybrid_select(&t, 3, 2, 42, &CosntfOptions::default()).unwrap();
        assert_eq!(a.i.indices(), b.i.indices());
        assert_eq!(a.j.indices(), b.j.indices());
    }

    #[test]
    fn hybrid_median_error_stays_moderate_on_noiseless_protocol_data() {
        // The 14 lateral pre-draws contain all 3 generators with
        // probability (1 - 0.99^14)^3 ≈ 2e-3, so near-exact medians are
        // out of reach by construction; the pre-sampled alternation
        // still lands close (measured median ≈ 3e-2 here).
        let mut errs = Vec::new();
        for seed in 0..10u64 {
            let out = crate::synth::gen_synthetic(&crate::synth::SynthSpec::new(
                100, 100, 10, 10, 3, 7000 + seed,
            ))
            .unwrap();
            let sel = hybrid_select(&out.tensor, 10, 3, 7100 + seed, &CosntfOptions::default())
                .unwrap();
            // a handful of alternations is plenty at this tolerance
            let opts = RecoverOptions { max_iter: 25, ..RecoverOptions::default() };
            let model = recover_factors(&out.tensor, &sel.i, &sel.j, &opts).unwrap();
            errs.push(rel_error(&out.tensor, &reconstruct(&model)).unwrap());
        }
        errs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = 0.5 * (errs[4] + errs[5]);
        assert!(median <= 0.3, "hybrid median {median:.3e}");
    }

    #[test]
    fn history_records_the_stopping_criterion() {
        let t = cosep_tensor(8, 7, 2, 2, 2, 19);
        let res = cosntf_select(&t, 2, 2, &CosntfOptions::default()).unwrap();
        assert_eq!(res.history.len(), res.outer_iterations);
        if res.converged {
            assert!(*res.history.last().unwrap() <= DELTA_SYNTHETIC);
        }
    }
}
