//! Projected fast-gradient solver for the self-dictionary selection model.
//!
//! Minimizes `½‖M − MY‖_F² + λ·tr(Y)` over the weighted box
//! `Ω = { 0 ≤ Y_ij ≤ 1, ω_i·Y_ij ≤ ω_j·Y_ii }` with `ω_j = ‖M_:j‖₁`,
//! using Nesterov momentum with a power-iteration Lipschitz estimate.
//! A candidate that raises the objective is rejected and the momentum
//! restarted, so the sequence of accepted objective values is
//! nonincreasing. Columns with zero weight can never be selected.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::tensor::{IndexList, Mode};

/// Solver knobs; the defaults mirror the experimental settings this
/// model is normally run with.
#[derive(Clone, Debug)]
pub struct FgmParams {
    /// Trace regularization weight.
    pub lambda: f64,
    /// Iteration cap.
    pub max_iter: usize,
    /// Restart momentum (and reject the step) when the objective rises.
    pub restart: bool,
}

impl Default for FgmParams {
    fn default() -> Self {
        Self { lambda: 0.25, max_iter: 500, restart: true }
    }
}

/// A self-dictionary selection problem over the columns of `m`.
#[derive(Clone, Debug)]
pub struct FgmProblem {
    /// Data matrix, nonnegative.
    pub m: Array2<f64>,
    /// Number of columns the caller intends to keep.
    pub r: usize,
    pub params: FgmParams,
}

impl FgmProblem {
    pub fn new(m: Array2<f64>, r: usize) -> Self {
        Self { m, r, params: FgmParams::default() }
    }

    /// Column weights `ω_j = ‖M_:j‖₁`.
    pub fn weights(&self) -> Vec<f64> {
        self.m
            .columns()
            .into_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum())
            .collect()
    }
}

/// Solver output: the final iterate, its diagonal, and the accepted
/// objective values (nonincreasing; `restart_checkpoints` is the
/// subsequence recorded at restart events plus the endpoints).
#[derive(Clone, Debug)]
pub struct FgmOutput {
    pub y: Array2<f64>,
    pub diag: Vec<f64>,
    pub objective_history: Vec<f64>,
    pub restart_checkpoints: Vec<f64>,
    pub iterations: usize,
}

/// Projects onto `Ω`: clip to `[0, 1]`, then cap each off-diagonal
/// entry at `(ω_j/ω_i)·Y_ii` with the diagonal held fixed. The result
/// satisfies both constraint families and the map is idempotent.
pub(crate) fn project_omega(y: &mut Array2<f64>, w: &[f64]) {
    y.mapv_inplace(|v| v.clamp(0.0, 1.0));
    let n = w.len();
    for i in 0..n {
        if w[i] <= 0.0 {
            continue;
        }
        let yii = y[[i, i]];
        let inv_wi = 1.0 / w[i];
        for j in 0..n {
            if j == i {
                continue;
            }
            let cap = w[j] * inv_wi * yii;
            if y[[i, j]] > cap {
                y[[i, j]] = cap;
            }
        }
    }
}

/// Largest eigenvalue of the PSD matrix `g` by power iteration.
fn lipschitz_estimate(g: &Array2<f64>, iterations: usize) -> f64 {
    let n = g.dim().0;
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + i as f64 / n as f64).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    let mut vec = ndarray::Array1::from(v);
    for _ in 0..iterations {
        let next = g.dot(&vec);
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        vec = next / norm;
    }
    vec.dot(&g.dot(&vec))
}

/// `½‖M − MY‖² + λ tr(Y)` evaluated through `G = MᵀM`.
fn objective(g: &Array2<f64>, tr_g: f64, y: &Array2<f64>, lambda: f64) -> f64 {
    let gy = g.dot(y);
    let cross: f64 = (0..y.dim().0).map(|i| gy[[i, i]]).sum();
    let quad: f64 = y.iter().zip(gy.iter()).map(|(a, b)| a * b).sum();
    let trace: f64 = (0..y.dim().0).map(|i| y[[i, i]]).sum();
    0.5 * (tr_g - 2.0 * cross + quad) + lambda * trace
}

/// Runs the projected fast gradient method from `Y = 0`.
pub fn fgm_solve(problem: &FgmProblem) -> FgmOutput {
    let n = problem.m.dim().1;
    let w = problem.weights();
    let lambda = problem.params.lambda;
    let g = problem.m.t().dot(&problem.m);
    let tr_g: f64 = (0..n).map(|i| g[[i, i]]).sum();

    let lip = lipschitz_estimate(&g, 30);
    let mut y = Array2::<f64>::zeros((n, n));
    if lip <= 0.0 {
        // zero data: the trace term alone is minimized at Y = 0
        let diag = vec![0.0; n];
        return FgmOutput {
            y,
            diag,
            objective_history: vec![0.0],
            restart_checkpoints: vec![0.0],
            iterations: 0,
        };
    }
    let step = 1.0 / lip;

    let mut f_y = objective(&g, tr_g, &y, lambda);
    let mut z = y.clone();
    let mut t_mom = 1.0f64;
    let mut history = vec![f_y];
    let mut checkpoints = vec![f_y];
    let mut just_restarted = false;
    let mut stall = 0usize;
    let mut iterations = 0;

    for it in 1..=problem.params.max_iter {
        iterations = it;
        // ∇f(Z) = MᵀM (Z − I) + λ I
        let mut grad = g.dot(&z);
        grad -= &g;
        for i in 0..n {
            grad[[i, i]] += lambda;
        }
        let mut cand = &z - &(grad * step);
        project_omega(&mut cand, &w);
        let f_cand = objective(&g, tr_g, &cand, lambda);

        if f_cand <= f_y {
            let gain = f_y - f_cand;
            let y_prev = std::mem::replace(&mut y, cand);
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_mom * t_mom).sqrt());
            let beta = (t_mom - 1.0) / t_next;
            z = &y + &((&y - &y_prev) * beta);
            t_mom = t_next;
            f_y = f_cand;
            history.push(f_y);
            just_restarted = false;
            if gain <= 1e-14 * (1.0 + f_y.abs()) {
                stall += 1;
                if stall >= 5 {
                    break;
                }
            } else {
                stall = 0;
            }
        } else if problem.params.restart && !just_restarted {
            // reject the candidate and retry as a plain projected
            // gradient step from the current iterate
            z = y.clone();
            t_mom = 1.0;
            checkpoints.push(f_y);
            just_restarted = true;
        } else {
            // even the unaccelerated step raises the objective: the
            // Lipschitz estimate is as good as it gets, stop here
            break;
        }
    }
    checkpoints.push(f_y);

    let diag = (0..n).map(|i| y[[i, i]]).collect();
    FgmOutput { y, diag, objective_history: history, restart_checkpoints: checkpoints, iterations }
}

/// Positions of the `r` largest values, ties toward the lower index,
/// returned in ascending index order. Only `eligible` positions count.
pub(crate) fn top_r_indices(values: &[f64], r: usize, eligible: &[bool]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).filter(|&i| eligible[i]).collect();
    order.sort_by(|&a, &b| {
        values[b].partial_cmp(&values[a]).expect("finite diagonal").then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order.into_iter().take(r).collect();
    picked.sort_unstable();
    picked
}

/// Solves the self-dictionary model on `m` and returns the indices of
/// the `r` largest diagonal entries (zero-weight columns excluded).
pub fn snmf_fgm_select(
    m: &Array2<f64>,
    r: usize,
    mode: Mode,
    params: &FgmParams,
) -> Result<IndexList> {
    let n = m.dim().1;
    let problem = FgmProblem { m: m.clone(), r, params: params.clone() };
    let w = problem.weights();
    let eligible: Vec<bool> = w.iter().map(|&x| x > 0.0).collect();
    let available = eligible.iter().filter(|&&e| e).count();
    if r > available {
        return Err(Error::NotEnoughCandidates { needed: r, available });
    }
    let out = fgm_solve(&problem);
    let picked = top_r_indices(&out.diag, r, &eligible);
    IndexList::new_distinct(mode, picked, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nnls::{nnls_cd, NnlsOptions};
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    fn feasible(y: &Array2<f64>, w: &[f64]) -> bool {
        let n = w.len();
        for i in 0..n {
            for j in 0..n {
                let v = y[[i, j]];
                if !(-1e-12..=1.0 + 1e-12).contains(&v) {
                    return false;
                }
                if w[i] * v > w[j] * y[[i, i]] + 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn projection_is_feasible_and_idempotent() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let m = Array2::from_shape_fn((6, 5), |_| rng.gen::<f64>());
        let problem = FgmProblem::new(m, 2);
        let w = problem.weights();
        let mut y = Array2::from_shape_fn((5, 5), |_| rng.gen::<f64>() * 3.0 - 1.0);
        project_omega(&mut y, &w);
        assert!(feasible(&y, &w));
        let once = y.clone();
        project_omega(&mut y, &w);
        assert_eq!(y, once);
    }

    #[test]
    fn iterates_stay_feasible_and_objective_monotone() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let m = Array2::from_shape_fn((8, 6), |_| rng.gen::<f64>());
        let problem = FgmProblem::new(m, 3);
        let w = problem.weights();
        let out = fgm_solve(&problem);
        assert!(feasible(&out.y, &w));
        for pair in out.objective_history.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * (1.0 + pair[0].abs()));
        }
        for pair in out.restart_checkpoints.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12 * (1.0 + pair[0].abs()));
        }
    }

    #[test]
    fn duplicated_column_support_still_selects_a_reconstructing_column() {
        // with exactly duplicated columns the split between the twins is
        // degenerate; what matters is that the top pick reconstructs M
        let c = array![10.0, 20.0, 5.0];
        let m = ndarray::stack![ndarray::Axis(1), c, c];
        let problem = FgmProblem::new(m.clone(), 1);
        let out = fgm_solve(&problem);
        // the trace weight leaves a residual floor of about λ/‖M‖²
        let residual = {
            let gy = m.dot(&out.y);
            (&m - &gy).iter().map(|v| v * v).sum::<f64>().sqrt()
        };
        assert!(residual <= 1e-3 * m.iter().map(|v| v * v).sum::<f64>().sqrt());
        let sel = snmf_fgm_select(&m, 1, Mode::Lateral, &FgmParams::default()).unwrap();
        let picked = sel.indices()[0];
        // brute-force: the picked column alone reconstructs M
        let col = m.column(picked).to_owned().insert_axis(ndarray::Axis(1));
        let x = nnls_cd(&m, &col, None, &NnlsOptions::default());
        let err = (&m - &col.dot(&x)).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err <= 1e-8);
    }

    #[test]
    fn separable_matrix_recovers_generating_columns() {
        // M = W [I_r, H'] Π with H' column sums below one
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let rows = 10;
        let r = 3;
        let extra = 6;
        let w_mat = Array2::from_shape_fn((rows, r), |_| rng.gen::<f64>() + 0.05);
        let mut h = Array2::from_shape_fn((r, extra), |_| rng.gen::<f64>());
        for mut col in h.columns_mut() {
            let s: f64 = col.iter().sum();
            col.mapv_inplace(|v| 0.8 * v / s);
        }
        // permutation: generators end up at columns 2, 5, 7
        let n = r + extra;
        let gen_pos = [2usize, 5, 7];
        let mut m = Array2::<f64>::zeros((rows, n));
        let mut extra_cols: Vec<usize> = (0..n).filter(|c| !gen_pos.contains(c)).collect();
        extra_cols.sort_unstable();
        for (g, &pos) in gen_pos.iter().enumerate() {
            m.column_mut(pos).assign(&w_mat.column(g));
        }
        for (e, &pos) in extra_cols.iter().enumerate() {
            let combo = w_mat.dot(&h.column(e));
            m.column_mut(pos).assign(&combo);
        }
        // oracle: the true generators reconstruct M exactly
        let mut w_sel = Array2::<f64>::zeros((rows, r));
        for (g, &pos) in gen_pos.iter().enumerate() {
            w_sel.column_mut(g).assign(&m.column(pos));
        }
        let x = nnls_cd(&m, &w_sel, None, &NnlsOptions::default());
        let oracle_err = (&m - &w_sel.dot(&x)).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(oracle_err <= 1e-8, "construction is not separable: {oracle_err}");

        let sel = snmf_fgm_select(&m, r, Mode::Lateral, &FgmParams::default()).unwrap();
        assert_eq!(sel.indices(), &gen_pos, "diag picks {:?}", sel.indices());
    }

    #[test]
    fn zero_lambda_square_invertible_reaches_feasible_identity_bound() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let mut m = Array2::from_shape_fn((5, 5), |_| rng.gen::<f64>() * 0.2);
        for i in 0..5 {
            m[[i, i]] += 1.0;
        }
        let params = FgmParams { lambda: 0.0, ..Default::default() };
        let problem = FgmProblem { m: m.clone(), r: 5, params };
        let out = fgm_solve(&problem);
        // objective at I is exactly 0; the solver must come close, and
        // must in any case beat the zero starting point
        let f_last = *out.objective_history.last().unwrap();
        assert!(f_last <= 1e-6, "objective at solution {f_last}");
        assert!(f_last <= out.objective_history[0]);
    }

    #[test]
    fn top_r_picks_largest_with_low_index_ties() {
        let diag = [0.9, 0.1, 0.8];
        let all = vec![true; 3];
        assert_eq!(top_r_indices(&diag, 2, &all), vec![0, 2]);
        let tie = [0.5, 0.7, 0.5, 0.7];
        assert_eq!(top_r_indices(&tie, 3, &all.repeat(2)[..4]), vec![0, 1, 3]);
    }

    #[test]
    fn select_all_columns_returns_everything() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let m = Array2::from_shape_fn((4, 3), |_| rng.gen::<f64>() + 0.1);
        let sel = snmf_fgm_select(&m, 3, Mode::Lateral, &FgmParams::default()).unwrap();
        assert_eq!(sel.indices(), &[0, 1, 2]);
    }

    #[test]
    fn zero_weight_columns_are_excluded() {
        let mut m = Array2::<f64>::zeros((4, 3));
        m[[0, 0]] = 1.0;
        m[[1, 2]] = 2.0;
        // column 1 is identically zero
        let sel = snmf_fgm_select(&m, 2, Mode::Lateral, &FgmParams::default()).unwrap();
        assert_eq!(sel.indices(), &[0, 2]);
        assert!(matches!(
            snmf_fgm_select(&m, 3, Mode::Lateral, &FgmParams::default()),
            Err(Error::NotEnoughCandidates { needed: 3, available: 2 })
        ));
    }
}
