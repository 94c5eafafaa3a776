//! Covering LPs `min c'x, A x >= b, x >= 0` with `c >= 0`.
//!
//! The dual `max b'y, A'y <= c, y >= 0` has the origin as a feasible basis,
//! so it is solved by the primal simplex method without a phase one. The
//! primal solution is read off the reduced costs of the dual slacks.

use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-12;
// Switch from Dantzig's rule to Bland's rule after this many degenerate pivots.
const DEGENERATE_STREAK: usize = 32;
const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    /// One multiplier per constraint row.
    pub duals: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

pub fn solve_covering(cost: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpSolution> {
    let n = cost.len();
    let m = rows.len();
    if rhs.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Solver("inconsistent LP dimensions".into()));
    }
    if cost.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(Error::Solver("covering LP needs a nonnegative cost".into()));
    }
    if m == 0 {
        return Ok(LpSolution {
            x: vec![0.0; n],
            duals: Vec::new(),
            objective: 0.0,
            pivots: 0,
        });
    }

    // tableau: n rows, columns y (m) | slack (n) | rhs
    let width = m + n + 1;
    let mut tab = vec![0.0; n * width];
    for j in 0..n {
        let row = &mut tab[j * width..(j + 1) * width];
        for i in 0..m {
            row[i] = rows[i][j];
        }
        row[m + j] = 1.0;
        row[m + n] = cost[j];
    }
    let mut obj = vec![0.0; width];
    for i in 0..m {
        obj[i] = -rhs[i];
    }
    let mut basis: Vec<usize> = (m..m + n).collect();

    let mut pivots = 0;
    let mut degenerate = 0;
    loop {
        let bland = degenerate >= DEGENERATE_STREAK;
        let entering = if bland {
            (0..m + n).find(|&q| obj[q] < -PIVOT_EPS)
        } else {
            (0..m + n)
                .filter(|&q| obj[q] < -PIVOT_EPS)
                .min_by(|&a, &b| obj[a].total_cmp(&obj[b]).then(a.cmp(&b)))
        };
        let Some(q) = entering else { break };

        let mut leave: Option<(usize, f64)> = None;
        for j in 0..n {
            let a = tab[j * width + q];
            if a > PIVOT_EPS {
                let ratio = tab[j * width + m + n] / a;
                leave = match leave {
                    None => Some((j, ratio)),
                    Some((k, best)) => {
                        if ratio < best - PIVOT_EPS || (ratio <= best + PIVOT_EPS && basis[j] < basis[k]) {
                            Some((j, ratio))
                        } else {
                            Some((k, best))
                        }
                    }
                };
            }
        }
        let Some((p, ratio)) = leave else {
            return Err(Error::Solver("covering LP is infeasible".into()));
        };
        degenerate = if ratio.abs() <= PIVOT_EPS { degenerate + 1 } else { 0 };

        let piv = tab[p * width + q];
        for k in 0..width {
            tab[p * width + k] /= piv;
        }
        let pivot_row: Vec<f64> = tab[p * width..(p + 1) * width].to_vec();
        for j in 0..n {
            if j == p {
                continue;
            }
            let factor = tab[j * width + q];
            if factor != 0.0 {
                let row = &mut tab[j * width..(j + 1) * width];
                for k in 0..width {
                    row[k] -= factor * pivot_row[k];
                }
                row[q] = 0.0;
            }
        }
        let factor = obj[q];
        for k in 0..width {
            obj[k] -= factor * pivot_row[k];
        }
        obj[q] = 0.0;
        basis[p] = q;

        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(Error::Solver("simplex pivot limit reached".into()));
        }
    }

    let mut duals = vec![0.0; m];
    for (j, &b) in basis.iter().enumerate() {
        if b < m {
            duals[b] = tab[j * width + m + n].max(0.0);
        }
    }
    let x: Vec<f64> = (0..n).map(|j| obj[m + j].max(0.0)).collect();
    let objective = cost.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpSolution {
        x,
        duals,
        objective,
        pivots,
    })
}
