//! Nonnegative least squares by block coordinate descent.
//!
//! Minimizes `‖B − QX‖_F²` over `X ≥ 0` a row of `X` at a time:
//! `x_k ← max(0, x_k + (QᵀB − QᵀQX)_k / (QᵀQ)_kk)`, which is the exact
//! minimizer in that row block, so the objective never increases. The
//! normal-equation products `QᵀQ` and `QᵀB` are formed once; forming
//! them dominates the cost when `Q` is tall and skinny.
//!
//! Coordinate descent zigzags badly when columns of `Q` are strongly
//! correlated, so columns whose KKT conditions are still violated when
//! the sweeps stop are finished by a warm-started active-set solve
//! (Lawson–Hanson on the normal equations). On well-conditioned data
//! that stage never triggers.

use ndarray::Array2;

#[derive(Clone, Debug)]
pub struct NnlsOptions {
    /// Cap on full coordinate sweeps.
    pub max_sweeps: usize,
    /// Stop sweeping when a sweep improves the objective by less than
    /// this, relative to the current objective value.
    pub rel_tol: f64,
}

impl Default for NnlsOptions {
    fn default() -> Self {
        Self { max_sweeps: 200, rel_tol: 1e-10 }
    }
}

/// Rows with `(QᵀQ)_kk` at or below this are skipped entirely.
const DIAG_FLOOR: f64 = 1e-16;

/// Gaussian elimination with partial pivoting on a row-major `n×n`
/// system; false when a pivot collapses (rank-deficient support Gram).
fn solve_dense(mat: &mut [f64], rhs: &mut [f64], n: usize) -> bool {
    let mut scale = 0.0f64;
    for i in 0..n {
        scale = scale.max(mat[i * n + i].abs());
    }
    if scale == 0.0 {
        return false;
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if mat[r * n + col].abs() > mat[piv * n + col].abs() {
                piv = r;
            }
        }
        if mat[piv * n + col].abs() <= 1e-13 * scale {
            return false;
        }
        if piv != col {
            for c in 0..n {
                mat.swap(col * n + c, piv * n + c);
            }
            rhs.swap(col, piv);
        }
        let d = mat[col * n + col];
        for r in col + 1..n {
            let f = mat[r * n + col] / d;
            if f != 0.0 {
                for c in col..n {
                    mat[r * n + c] -= f * mat[col * n + c];
                }
                rhs[r] -= f * rhs[col];
            }
        }
    }
    for r in (0..n).rev() {
        let mut acc = rhs[r];
        for c in r + 1..n {
            acc -= mat[r * n + c] * rhs[c];
        }
        rhs[r] = acc / mat[r * n + r];
    }
    true
}

/// Restricted least-squares solution on the passive set. A
/// rank-deficient support Gram retires (and zeroes) the passive index
/// with the smallest current value; a linearly dependent column has
/// zero dual gradient at the restricted optimum, so it will not be
/// re-admitted. Returns false when nothing solvable remains.
fn restricted_solve(
    qtq: &Array2<f64>,
    rhs_full: &[f64],
    passive: &mut Vec<usize>,
    x_col: &mut [f64],
    out: &mut Vec<f64>,
) -> bool {
    loop {
        let s = passive.len();
        if s == 0 {
            return false;
        }
        let mut sub = vec![0.0f64; s * s];
        let mut rhs = vec![0.0f64; s];
        for (a, &ra) in passive.iter().enumerate() {
            rhs[a] = rhs_full[ra];
            for (b, &rb) in passive.iter().enumerate() {
                sub[a * s + b] = qtq[[ra, rb]];
            }
        }
        if solve_dense(&mut sub, &mut rhs, s) {
            out.clear();
            out.extend_from_slice(&rhs);
            return true;
        }
        let drop_pos = (0..s)
            .min_by(|&a, &b| {
                x_col[passive[a]]
                    .partial_cmp(&x_col[passive[b]])
                    .expect("finite iterate")
            })
            .expect("nonempty passive set");
        x_col[passive[drop_pos]] = 0.0;
        passive.remove(drop_pos);
    }
}

/// Exact NNLS for one column by warm-started Lawson–Hanson, starting
/// from the feasible iterate `x_col`. Objective never increases.
fn exact_nnls_column(
    qtq: &Array2<f64>,
    diag: &[f64],
    rhs_full: &[f64],
    x_col: &mut [f64],
    dual_tol: f64,
) -> bool {
    let k = x_col.len();
    let updatable: Vec<bool> = (0..k).map(|r| diag[r] > DIAG_FLOOR).collect();
    let mut passive: Vec<usize> =
        (0..k).filter(|&r| updatable[r] && x_col[r] > 0.0).collect();
    let mut z = Vec::new();
    let mut changed = false;
    let pivot_cap = 3 * k + 10;

    for _ in 0..pivot_cap {
        // inner loop: walk the passive-set solution into feasibility
        for _ in 0..pivot_cap {
            if passive.is_empty() {
                break;
            }
            if !restricted_solve(qtq, rhs_full, &mut passive, x_col, &mut z) {
                break;
            }
            let min_z = passive
                .iter()
                .zip(z.iter())
                .map(|(_, &v)| v)
                .fold(f64::INFINITY, f64::min);
            if min_z >= 0.0 {
                for (&r, &v) in passive.iter().zip(z.iter()) {
                    if x_col[r] != v {
                        changed = true;
                    }
                    x_col[r] = v;
                }
                // exact zeros leave the passive set so the dual check
                // can consider them again without duplication
                passive.retain(|&r| x_col[r] > 0.0);
                break;
            }
            // step toward z until the first coordinate hits zero
            let mut alpha = 1.0f64;
            for (&r, &v) in passive.iter().zip(z.iter()) {
                if v <= 0.0 {
                    let denom = x_col[r] - v;
                    if denom > 0.0 {
                        alpha = alpha.min(x_col[r] / denom);
                    }
                }
            }
            for (&r, &v) in passive.iter().zip(z.iter()) {
                let stepped = x_col[r] + alpha * (v - x_col[r]);
                x_col[r] = if stepped > 0.0 { stepped } else { 0.0 };
                changed = true;
            }
            let before = passive.len();
            passive.retain(|&r| x_col[r] > 0.0);
            if passive.len() == before {
                // numerical stall: force out the most negative direction
                if let Some((pos, _)) = passive
                    .iter()
                    .zip(z.iter())
                    .enumerate()
                    .filter(|(_, (_, &v))| v <= 0.0)
                    .min_by(|(_, (_, a)), (_, (_, b))| a.partial_cmp(b).expect("finite"))
                    .map(|(pos, _)| (pos, ()))
                {
                    x_col[passive[pos]] = 0.0;
                    passive.remove(pos);
                } else {
                    break;
                }
            }
        }
        // dual check over the zero set
        let mut best: Option<(usize, f64)> = None;
        for r in 0..k {
            if !updatable[r] || x_col[r] > 0.0 {
                continue;
            }
            let grad =
                rhs_full[r] - passive.iter().map(|&s| qtq[[r, s]] * x_col[s]).sum::<f64>();
            if grad > dual_tol && best.is_none_or(|(_, g)| grad > g) {
                best = Some((r, grad));
            }
        }
        match best {
            Some((r, _)) => passive.push(r),
            None => break,
        }
    }
    changed
}

/// Per-column KKT violation of the current iterate, measured through
/// the maintained gradient `G = QᵀQ·X`.
fn kkt_violation(
    x: &Array2<f64>,
    g: &Array2<f64>,
    qtb: &Array2<f64>,
    diag: &[f64],
    c: usize,
) -> f64 {
    let k = diag.len();
    let mut viol = 0.0f64;
    for r in 0..k {
        if diag[r] <= DIAG_FLOOR {
            continue;
        }
        let grad = qtb[[r, c]] - g[[r, c]];
        if x[[r, c]] > 0.0 {
            viol = viol.max(grad.abs());
        } else {
            viol = viol.max(grad);
        }
    }
    viol
}

/// Solves `min_{X ≥ 0} ‖B − QX‖_F²`, warm-starting from `x0` when
/// given (negative entries of the warm start are clipped to zero).
pub fn nnls_cd(
    b: &Array2<f64>,
    q: &Array2<f64>,
    x0: Option<&Array2<f64>>,
    opts: &NnlsOptions,
) -> Array2<f64> {
    let (rows, k) = q.dim();
    let (b_rows, cols) = b.dim();
    assert_eq!(rows, b_rows, "B and Q must agree on the row count");

    let qtq = q.t().dot(q);
    let qtb = q.t().dot(b);
    let btb: f64 = b.iter().map(|v| v * v).sum();

    let mut x = match x0 {
        Some(start) => {
            assert_eq!(start.dim(), (k, cols), "warm start has the wrong shape");
            start.mapv(|v| v.max(0.0))
        }
        None => Array2::zeros((k, cols)),
    };
    // g = QᵀQ·X, maintained incrementally as rows of X change
    let mut g = qtq.dot(&x);

    let diag: Vec<f64> = (0..k).map(|i| qtq[[i, i]]).collect();
    let mut delta = vec![0.0f64; cols];

    let objective = |x: &Array2<f64>, g: &Array2<f64>| -> f64 {
        // ‖B−QX‖² = ‖B‖² − 2⟨X,QᵀB⟩ + ⟨X,QᵀQX⟩, clamped against
        // cancellation noise near a zero residual
        let quad: f64 = x.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
        let cross: f64 = x.iter().zip(qtb.iter()).map(|(a, b)| a * b).sum();
        (btb - 2.0 * cross + quad).max(0.0)
    };

    for _ in 0..opts.max_sweeps {
        let mut any_change = false;
        // exact objective decrease of this sweep, accumulated per row:
        // updating one row by δ lowers ‖B−QX‖² by Σ_c (2·δ·ĝ − d·δ²)
        let mut dec_sweep = 0.0;
        for row in 0..k {
            if diag[row] <= DIAG_FLOOR {
                continue;
            }
            let d_row = diag[row];
            let inv_d = 1.0 / d_row;
            let mut changed = false;
            {
                let g_row = g.row(row);
                let qtb_row = qtb.row(row);
                let x_row = x.row(row);
                for c in 0..cols {
                    let grad = qtb_row[c] - g_row[c];
                    let new = (x_row[c] + grad * inv_d).max(0.0);
                    let d = new - x_row[c];
                    delta[c] = d;
                    if d != 0.0 {
                        changed = true;
                        dec_sweep += d * (2.0 * grad - d_row * d);
                    }
                }
            }
            if !changed {
                continue;
            }
            any_change = true;
            {
                let mut x_row = x.row_mut(row);
                for c in 0..cols {
                    x_row[c] += delta[c];
                }
            }
            let delta_view = ndarray::ArrayView1::from(&delta[..]);
            for r in 0..k {
                let w = qtq[[r, row]];
                if w != 0.0 {
                    g.row_mut(r).scaled_add(w, &delta_view);
                }
            }
        }
        if !any_change {
            break;
        }
        // the decrement accumulator stays meaningful long after the
        // objective itself drowns in rounding noise
        if dec_sweep <= opts.rel_tol * objective(&x, &g) {
            break;
        }
    }

    // active-set finish for columns the sweeps left short of the KKT
    // conditions
    let mut rhs_col = vec![0.0f64; k];
    let mut x_col = vec![0.0f64; k];
    for c in 0..cols {
        let col_scale = (0..k).map(|r| qtb[[r, c]].abs()).fold(0.0, f64::max);
        let dual_tol = 1e-11 * (1.0 + col_scale);
        if kkt_violation(&x, &g, &qtb, &diag, c) <= dual_tol {
            continue;
        }
        for r in 0..k {
            rhs_col[r] = qtb[[r, c]];
            x_col[r] = x[[r, c]];
        }
        let _ = exact_nnls_column(&qtq, &diag, &rhs_col, &mut x_col, dual_tol);
        {
            // guarded acceptance: keep the active-set column only if it
            // does not lose to the sweep iterate
            let f_of = |col: &[f64]| -> f64 {
                let mut quad = 0.0;
                let mut cross = 0.0;
                for r in 0..k {
                    if col[r] == 0.0 {
                        continue;
                    }
                    cross += col[r] * qtb[[r, c]];
                    let mut acc = 0.0;
                    for s in 0..k {
                        if col[s] != 0.0 {
                            acc += qtq[[r, s]] * col[s];
                        }
                    }
                    quad += col[r] * acc;
                }
                quad - 2.0 * cross
            };
            let current: Vec<f64> = (0..k).map(|r| x[[r, c]]).collect();
            if f_of(&x_col) < f_of(&current) {
                for r in 0..k {
                    x[[r, c]] = x_col[r];
                }
            }
        }
    }
    x
}


#[cfg(test)]
mod active_set_tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn column_solver_handles_an_exactly_dependent_dictionary() {
        // c2 - c1 = c4 - c3: the support Gram is singular whenever all
        // four columns are active, exercising the dependent-drop path
        let q = array![
            [1.0, 3.0, 8.0, 5.0, 7.0, 8.0],
            [2.0, 4.0, 10.0, 6.0, 8.0, 10.0],
            [5.0, 7.0, 8.0, 1.0, 3.0, 8.0],
            [6.0, 8.0, 10.0, 2.0, 4.0, 10.0]
        ]
        .t()
        .to_owned();
        let x_true = array![[0.3], [0.0], [0.5], [0.1]];
        let b = q.dot(&x_true);
        let qtq = q.t().dot(&q);
        let qtb = q.t().dot(&b);
        let diag: Vec<f64> = (0..4).map(|i| qtq[[i, i]]).collect();
        let rhs: Vec<f64> = (0..4).map(|r| qtb[[r, 0]]).collect();
        let mut x_col = vec![0.0; 4];
        let scale = rhs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        exact_nnls_column(&qtq, &diag, &rhs, &mut x_col, 1e-11 * (1.0 + scale));
        let xa = ndarray::Array2::from_shape_vec((4, 1), x_col.clone()).unwrap();
        let r = (&b - &q.dot(&xa)).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(r < 1e-8, "residual {r:.3e}, x = {x_col:?}");
    }
}
