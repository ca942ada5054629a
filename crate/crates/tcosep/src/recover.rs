//! Nonnegative factor recovery for a chosen core.
//!
//! Given index sets `(I, J)`, alternately solves the two tensor NNLS
//! subproblems of `min ‖A − P1 * A(I,J,:) * P2‖_F²`. Each subproblem is
//! a matrix NNLS against a block-circulant design:
//!
//! - `P2`-step: `‖unfold(A) − bcirc(P1 * A_IJ) · unfold(P2)‖`;
//! - `P1`-step on the transposed system:
//!   `‖unfold(Aᵀ) − bcirc((A_IJ * P2)ᵀ) · unfold(P1ᵀ)‖`.
//!
//! Both solves are warm-started from the previous iterate, so the
//! objective is nonincreasing across alternations.

use crate::error::{Error, Result};
use crate::nnls::{nnls_cd, NnlsOptions};
use crate::tensor::{diff_fro_norm, tprod, IndexList, Tensor3};

#[derive(Clone, Debug)]
pub struct RecoverOptions {
    /// Outer alternation cap.
    pub max_iter: usize,
    /// Stop when `‖P1_old − P1‖_F + ‖P2_old − P2‖_F` drops below this.
    pub delta: f64,
    /// Inner NNLS settings.
    pub nnls: NnlsOptions,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self { max_iter: 100, delta: 1e-6, nnls: NnlsOptions::default() }
    }
}

/// A recovered coseparable model `A ≈ P1 * core * P2`.
#[derive(Clone, Debug)]
pub struct CosepModel {
    pub p1: Tensor3,
    pub core: Tensor3,
    pub p2: Tensor3,
    pub i: IndexList,
    pub j: IndexList,
    pub iterations: usize,
    pub converged: bool,
    /// `‖A − P1 * core * P2‖_F²` after the initial solves and after
    /// each alternation.
    pub objective_history: Vec<f64>,
}

/// `P1 * core * P2`.
pub fn reconstruct(model: &CosepModel) -> Tensor3 {
    tprod(&tprod(&model.p1, &model.core).expect("factor shapes agree"), &model.p2)
        .expect("factor shapes agree")
}

/// `‖a − b‖_F / ‖a‖_F`; errors when the reference is zero.
pub fn rel_error(a: &Tensor3, b: &Tensor3) -> Result<f64> {
    let denom = a.fro_norm();
    if denom == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(diff_fro_norm(a, b)? / denom)
}

/// `1 − rel_error` (the CLI reports this in percent).
pub fn rel_approx(a: &Tensor3, b: &Tensor3) -> Result<f64> {
    Ok(1.0 - rel_error(a, b)?)
}

/// Solves `min_{P1 ≥ 0} ‖A − P1 * H‖` through the transposed unfolding;
/// `warm` is the previous `P1`.
fn solve_p1(a_t_unfold: &ndarray::Array2<f64>, h: &Tensor3, warm: Option<&Tensor3>, opts: &NnlsOptions, p: usize) -> Tensor3 {
    let design = h.transpose().bcirc();
    let warm_mat = warm.map(|w| w.transpose().unfold());
    let x = nnls_cd(a_t_unfold, &design, warm_mat.as_ref(), opts);
    Tensor3::fold(&x, p).expect("row count divisible by p").transpose()
}

/// Solves `min_{P2 ≥ 0} ‖A − G * P2‖`; `warm` is the previous `P2`.
fn solve_p2(a_unfold: &ndarray::Array2<f64>, g: &Tensor3, warm: Option<&Tensor3>, opts: &NnlsOptions, p: usize) -> Tensor3 {
    let design = g.bcirc();
    let warm_mat = warm.map(|w| w.unfold());
    let x = nnls_cd(a_unfold, &design, warm_mat.as_ref(), opts);
    Tensor3::fold(&x, p).expect("row count divisible by p")
}

/// Alternating NNLS recovery of `(P1, P2)` for the core `A(I, J, :)`.
pub fn recover_factors(
    t: &Tensor3,
    i: &IndexList,
    j: &IndexList,
    opts: &RecoverOptions,
) -> Result<CosepModel> {
    if let Some(pos) = t.as_slice().iter().position(|&v| v < 0.0) {
        return Err(Error::NegativeInput(pos));
    }
    let (_, _, p) = t.dims();
    let core = t.subtensor(Some(i), Some(j))?;
    let rows = t.horizontal_subtensor(i)?;
    let cols = t.lateral_subtensor(j)?;

    let a_unfold = t.unfold();
    let a_t_unfold = t.transpose().unfold();

    // initial solves from zero against the raw row/column subtensors
    let mut p1 = solve_p1(&a_t_unfold, &rows, None, &opts.nnls, p);
    let mut p2 = solve_p2(&a_unfold, &cols, None, &opts.nnls, p);

    let objective = |p1: &Tensor3, p2: &Tensor3| -> Result<f64> {
        let rebuilt = tprod(&tprod(p1, &core)?, p2)?;
        Ok(diff_fro_norm(t, &rebuilt)?.powi(2))
    };
    let mut history = vec![objective(&p1, &p2)?];

    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        let p1_old = p1.clone();
        let p2_old = p2.clone();

        let g = tprod(&p1, &core)?;
        p2 = solve_p2(&a_unfold, &g, Some(&p2_old), &opts.nnls, p);
        let h = tprod(&core, &p2)?;
        p1 = solve_p1(&a_t_unfold, &h, Some(&p1_old), &opts.nnls, p);

        history.push(objective(&p1, &p2)?);
        let moved = diff_fro_norm(&p1_old, &p1)? + diff_fro_norm(&p2_old, &p2)?;
        if moved <= opts.delta {
            converged = true;
            break;
        }
    }

    debug_assert!(p1.is_nonnegative() && p2.is_nonnegative());
    Ok(CosepModel {
        p1,
        core,
        p2,
        i: i.clone(),
        j: j.clone(),
        iterations,
        converged,
        objective_history: history,
    })
}
