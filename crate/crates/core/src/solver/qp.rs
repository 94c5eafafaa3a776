//! Weighted least-norm covering QPs
//!
//! ```text
//!     minimize    sum_j w_j x_j^2
//!     subject to  A x >= b
//! ```
//!
//! with `w > 0`, `A >= 0` entrywise and `b >= 0`. For multipliers `l >= 0`
//! the minimizer of the Lagrangian is `x(l) = W^-1 A' l / 2 >= 0`, so the
//! sign constraint on `x` never binds. The dual
//! `q(l) = b'l - |W^-1/2 A' l|^2 / 4` is maximized by accelerated projected
//! gradient ascent; the current support is periodically polished by solving
//! the equality-constrained problem on it exactly, which certifies the
//! optimum through the KKT conditions.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const POLISH_EVERY: usize = 20;
const FEAS_TOL: f64 = 1e-11;

#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub x: Vec<f64>,
    pub duals: Vec<f64>,
    pub objective: f64,
    /// Primal objective minus dual objective, both evaluated at the returned
    /// (feasible) point and multipliers.
    pub gap: f64,
    pub iterations: usize,
}

struct Problem<'a> {
    w: &'a [f64],
    rows: &'a [Vec<f64>],
    rhs: &'a [f64],
}

impl Problem<'_> {
    fn check(&self) -> Result<()> {
        let n = self.w.len();
        if self.rhs.len() != self.rows.len() || self.rows.iter().any(|r| r.len() != n) {
            return Err(Error::Solver("inconsistent QP dimensions".into()));
        }
        if self.w.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::Solver("QP weights must be positive".into()));
        }
        if self.rows.iter().flatten().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::Solver("QP rows must be nonnegative".into()));
        }
        if self.rhs.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(Error::Solver("QP right-hand side must be nonnegative".into()));
        }
        for (row, &b) in self.rows.iter().zip(self.rhs) {
            if b > 0.0 && row.iter().all(|&a| a == 0.0) {
                return Err(Error::Solver("QP is infeasible: empty row with positive bound".into()));
            }
        }
        Ok(())
    }

    fn primal_of(&self, lambda: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.w.len()];
        for (row, &l) in self.rows.iter().zip(lambda) {
            if l != 0.0 {
                for (xj, a) in x.iter_mut().zip(row) {
                    *xj += l * a;
                }
            }
        }
        for (xj, w) in x.iter_mut().zip(self.w) {
            *xj /= 2.0 * w;
        }
        x
    }

    fn lhs(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().zip(x).map(|(a, v)| a * v).sum()).collect()
    }

    fn energy(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(w, v)| w * v * v).sum()
    }

    /// Dual value `b'l - sum_j w_j x_j(l)^2`.
    fn dual_value(&self, lambda: &[f64], x: &[f64]) -> f64 {
        let bl: f64 = self.rhs.iter().zip(lambda).map(|(b, l)| b * l).sum();
        bl - self.energy(x)
    }

    fn feasible(&self, x: &[f64]) -> bool {
        self.lhs(x)
            .iter()
            .zip(self.rhs)
            .all(|(a, b)| *a >= b - FEAS_TOL * b.max(1.0))
    }

    /// Scales `x` up until every constraint holds.
    fn make_feasible(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut scale = 1.0f64;
        for (a, &b) in self.lhs(x).iter().zip(self.rhs) {
            if b > 0.0 {
                if *a <= 0.0 {
                    return None;
                }
                scale = scale.max(b / a);
            }
        }
        Some(x.iter().map(|v| v * scale).collect())
    }

    fn gram(&self, support: &[usize]) -> DMatrix<f64> {
        let k = support.len();
        DMatrix::from_fn(k, k, |a, b| {
            let (ra, rb) = (&self.rows[support[a]], &self.rows[support[b]]);
            ra.iter()
                .zip(rb)
                .zip(self.w)
                .map(|((x, y), w)| x * y / (2.0 * w))
                .sum()
        })
    }

    /// Solves the problem with the constraints in `support` as equalities and
    /// returns the multipliers if they certify optimality of the full problem.
    fn polish(&self, support: &[usize]) -> Option<Vec<f64>> {
        if support.is_empty() {
            return None;
        }
        let g = self.gram(support);
        let b = DVector::from_iterator(support.len(), support.iter().map(|&i| self.rhs[i]));
        let mu = g.svd(true, true).solve(&b, 1e-13).ok()?;
        let scale = mu.amax().max(1.0);
        if mu.iter().any(|&v| v < -1e-10 * scale) {
            return None;
        }
        let mut lambda = vec![0.0; self.rows.len()];
        for (&i, &v) in support.iter().zip(mu.iter()) {
            lambda[i] = v.max(0.0);
        }
        let x = self.primal_of(&lambda);
        self.feasible(&x).then_some(lambda)
    }

    fn lipschitz_bound(&self) -> f64 {
        // Gershgorin bound on the largest eigenvalue of A W^-1 A' / 2.
        let m = self.rows.len();
        let all: Vec<usize> = (0..m).collect();
        let g = self.gram(&all);
        (0..m)
            .map(|i| (0..m).map(|j| g[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    fn finish(&self, lambda: Vec<f64>, iterations: usize) -> QpSolution {
        let raw = self.primal_of(&lambda);
        let dual = self.dual_value(&lambda, &raw);
        let x = if self.feasible(&raw) {
            raw
        } else {
            self.make_feasible(&raw).unwrap_or(raw)
        };
        let objective = self.energy(&x);
        QpSolution {
            gap: (objective - dual).max(0.0),
            x,
            duals: lambda,
            objective,
            iterations,
        }
    }
}

/// Accelerated projected dual ascent with support polishing. Stops when the
/// relative duality gap falls below `tol`.
pub fn solve(w: &[f64], rows: &[Vec<f64>], rhs: &[f64], tol: f64, max_iter: usize) -> Result<QpSolution> {
    let prob = Problem { w, rows, rhs };
    prob.check()?;
    let m = rows.len();
    if m == 0 || rhs.iter().all(|&b| b == 0.0) {
        return Ok(prob.finish(vec![0.0; m], 0));
    }
    let step = 1.0 / prob.lipschitz_bound();

    // Single-constraint starting guess, then momentum iterations.
    let mut lambda = vec![0.0; m];
    let mut y = lambda.clone();
    let mut t = 1.0f64;
    let mut last_dual = f64::NEG_INFINITY;
    for iter in 1..=max_iter {
        let x = prob.primal_of(&y);
        let lhs = prob.lhs(&x);
        let next: Vec<f64> = (0..m)
            .map(|i| (y[i] + step * (rhs[i] - lhs[i])).max(0.0))
            .collect();
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let x_next = prob.primal_of(&next);
        let dual = prob.dual_value(&next, &x_next);
        if dual < last_dual {
            // adaptive restart
            t = 1.0;
            y = next.clone();
        } else {
            let beta = (t - 1.0) / t_next;
            y = next.iter().zip(&lambda).map(|(a, b)| (a + beta * (a - b)).max(0.0)).collect();
            t = t_next;
        }
        lambda = next;
        last_dual = dual;

        if iter % POLISH_EVERY == 0 {
            let lhs = prob.lhs(&x_next);
            let support: Vec<usize> = (0..m)
                .filter(|&i| lambda[i] > 0.0 || lhs[i] <= rhs[i] * (1.0 + 1e-9))
                .filter(|&i| rhs[i] > 0.0)
                .collect();
            if let Some(exact) = prob.polish(&support) {
                return Ok(prob.finish(exact, iter));
            }
            let strict: Vec<usize> = (0..m).filter(|&i| lambda[i] > 0.0).collect();
            if let Some(exact) = prob.polish(&strict) {
                return Ok(prob.finish(exact, iter));
            }
            let sol = prob.finish(lambda.clone(), iter);
            if sol.gap <= tol * sol.objective.max(1e-300) {
                return Ok(sol);
            }
        }
    }
    let sol = prob.finish(lambda, max_iter);
    Err(Error::IterationLimit {
        iterations: max_iter,
        lower: sol.objective - sol.gap,
        upper: sol.objective,
    })
}

/// Hildreth's dual coordinate ascent with exact line search per
/// constraint. Used as an independent reference solver.
pub fn solve_hildreth(w: &[f64], rows: &[Vec<f64>], rhs: &[f64], tol: f64, max_sweeps: usize) -> Result<QpSolution> {
    let prob = Problem { w, rows, rhs };
    prob.check()?;
    let m = rows.len();
    let n = w.len();
    let curvature: Vec<f64> = rows
        .iter()
        .map(|r| r.iter().zip(w).map(|(a, w)| a * a / (2.0 * w)).sum())
        .collect();
    let mut lambda = vec![0.0; m];
    let mut x = vec![0.0; n];
    let scale = rhs.iter().copied().fold(0.0, f64::max).max(1e-300);
    for sweep in 1..=max_sweeps {
        for i in 0..m {
            if curvature[i] == 0.0 {
                continue;
            }
            let r: f64 = rhs[i] - rows[i].iter().zip(&x).map(|(a, v)| a * v).sum::<f64>();
            let delta = (r / curvature[i]).max(-lambda[i]);
            if delta != 0.0 {
                lambda[i] += delta;
                for j in 0..n {
                    x[j] += delta * rows[i][j] / (2.0 * w[j]);
                }
            }
        }
        let lhs = prob.lhs(&x);
        let kkt = (0..m)
            .map(|i| {
                let slack = lhs[i] - rhs[i];
                (-slack).max(0.0).max((lambda[i] * slack).abs())
            })
            .fold(0.0, f64::max);
        if kkt <= tol * scale {
            return Ok(prob.finish(lambda, sweep));
        }
    }
    let sol = prob.finish(lambda, max_sweeps);
    Err(Error::IterationLimit {
        iterations: max_sweeps,
        lower: sol.objective - sol.gap,
        upper: sol.objective,
    })
}
