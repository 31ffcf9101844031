//! Small dense two-phase simplex, used for minimax mixture fits.
//!
//! Problems here have a handful of variables and constraints, so a plain
//! tableau with Bland's rule is enough and always terminates.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{CoreError, Result};

const EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 10_000;

/// Solves `min c.x  s.t.  A x = b, x >= 0`. Returns the optimal `x`.
pub fn solve_standard_form(a: &[Vec<f64>], b: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|r| r.len() != n) {
        return Err(CoreError::Lp("inconsistent dimensions"));
    }
    // tableau columns: n structural, m artificial, rhs
    let width = n + m + 1;
    let mut t = vec![vec![0.0; width]; m];
    for i in 0..m {
        let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = s * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = s * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    // phase one: minimize the sum of artificials
    let mut cost1 = vec![0.0; n + m];
    for c in cost1.iter_mut().skip(n) {
        *c = 1.0;
    }
    run_simplex(&mut t, &mut basis, &cost1, n + m)?;
    let infeas: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &j)| j >= n)
        .map(|(i, _)| t[i][width - 1])
        .sum();
    if infeas > 1e-9 {
        return Err(CoreError::Lp("infeasible"));
    }
    // pivot remaining (zero-valued) artificials out where possible
    for i in 0..m {
        if basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t[i][j].abs() > EPS) {
                pivot(&mut t, &mut basis, i, j);
            }
        }
    }

    // phase two: artificials may not re-enter
    let mut cost2 = vec![0.0; n + m];
    cost2[..n].copy_from_slice(c);
    run_simplex(&mut t, &mut basis, &cost2, n)?;

    let mut x = vec![0.0; n];
    for (i, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = t[i][width - 1];
        }
    }
    Ok(x)
}

fn run_simplex(t: &mut [Vec<f64>], basis: &mut [usize], cost: &[f64], allowed: usize) -> Result<()> {
    let width = t.first().map_or(0, |r| r.len());
    for _ in 0..MAX_PIVOTS {
        // Bland: lowest-index column with negative reduced cost
        let entering = (0..allowed).find(|&j| {
            if basis.contains(&j) {
                return false;
            }
            let reduced = cost[j] - basis.iter().enumerate().map(|(i, &bj)| cost[bj] * t[i][j]).sum::<f64>();
            reduced < -EPS
        });
        let Some(j) = entering else {
            return Ok(());
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][j] > EPS {
                let ratio = t[i][width - 1] / t[i][j];
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                            Some((i, ratio))
                        } else {
                            Some((li, lr))
                        }
                    }
                };
            }
        }
        let Some((i, _)) = leave else {
            return Err(CoreError::Lp("unbounded"));
        };
        pivot(t, basis, i, j);
    }
    Err(CoreError::Lp("pivot limit reached"))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], row: usize, col: usize) {
    let p = t[row][col];
    for v in t[row].iter_mut() {
        *v /= p;
    }
    let pivot_row = t[row].clone();
    for (i, r) in t.iter_mut().enumerate() {
        if i == row {
            continue;
        }
        let f = r[col];
        if f != 0.0 {
            for (v, pv) in r.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
    }
    basis[row] = col;
}

/// Best convex mixture of component rows under a weighted max-residual.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxFit {
    pub weights: Vec<f64>,
    /// `max_o scale_o * |sum_i w_i c_{i,o} - target_o|` at the optimum.
    pub residual: f64,
}

/// Minimizes `max_o scale[o] * |sum_i w_i components[i][o] - target[o]|`
/// over the probability simplex `w_i >= 0, sum w_i = 1`.
pub fn minimax_mixture(components: &[Vec<f64>], target: &[f64], scale: &[f64]) -> Result<MinimaxFit> {
    let k = components.len();
    let m = target.len();
    if k == 0 {
        return Err(CoreError::Lp("no components"));
    }
    if scale.len() != m || components.iter().any(|c| c.len() != m) {
        return Err(CoreError::Lp("inconsistent dimensions"));
    }
    if m == 0 {
        let mut weights = vec![0.0; k];
        weights[0] = 1.0;
        return Ok(MinimaxFit { weights, residual: 0.0 });
    }
    // variables: w_1..w_k, t, slack_1..slack_{2m}
    let n = k + 1 + 2 * m;
    let mut a = Vec::with_capacity(2 * m + 1);
    let mut b = Vec::with_capacity(2 * m + 1);
    for o in 0..m {
        for (sign, slack) in [(1.0, k + 1 + 2 * o), (-1.0, k + 2 + 2 * o)] {
            // sign * s (sum w c - target) - t + slack = 0
            let mut row = vec![0.0; n];
            for i in 0..k {
                row[i] = sign * scale[o] * components[i][o];
            }
            row[k] = -1.0;
            row[slack] = 1.0;
            a.push(row);
            b.push(sign * scale[o] * target[o]);
        }
    }
    let mut simplex_row = vec![0.0; n];
    simplex_row[..k].iter_mut().for_each(|v| *v = 1.0);
    a.push(simplex_row);
    b.push(1.0);
    let mut c = vec![0.0; n];
    c[k] = 1.0;

    let x = solve_standard_form(&a, &b, &c)?;
    let mut weights: Vec<f64> = x[..k].iter().map(|w| w.max(0.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    // recompute the objective from the cleaned weights
    let residual = (0..m)
        .map(|o| {
            let mix: f64 = (0..k).map(|i| weights[i] * components[i][o]).sum();
            scale[o] * (mix - target[o]).abs()
        })
        .fold(0.0, f64::max);
    Ok(MinimaxFit { weights, residual })
}
