//! Doubling and Poincaré constants estimated over finite sets of balls and
//! test functions. Both are estimates from below: a larger sample of balls
//! or functions can only raise them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{Measure, MetricSpace, PointId, ScalarField, WeightedGraph};

fn check_measure(space: &MetricSpace, mu: &Measure) -> Result<()> {
    if !mu.is_on_points() || mu.len() != space.len() {
        return Err(Error::InvalidArgument("need a vertex measure with one weight per point".into()));
    }
    Ok(())
}

fn check_radii(radii: &[f64]) -> Result<()> {
    match radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        Some(r) => Err(Error::InvalidArgument(format!("radius {r} must be positive"))),
        None => Ok(()),
    }
}

/// Open-ball masses `mu(B(x, r))` for several radii at once.
fn ball_masses(row: &[f64], mu: &Measure, radii: &[f64]) -> Vec<f64> {
    radii
        .iter()
        .map(|&r| row.iter().zip(mu.weights()).filter(|(d, _)| **d < r).map(|(_, w)| w).sum())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingRow {
    pub center: PointId,
    pub r: f64,
    pub inner: f64,
    pub outer: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublingReport {
    /// Largest ratio over the tested balls; `1` when none could be tested.
    pub estimate: f64,
    pub rows: Vec<DoublingRow>,
    /// Balls of zero measure, excluded from the estimate.
    pub zero_balls: Vec<(PointId, f64)>,
}

/// `max mu(B(x, 2r)) / mu(B(x, r))` over the given centers and radii.
pub fn doubling_constant(space: &MetricSpace, mu: &Measure, centers: &[PointId], radii: &[f64]) -> Result<DoublingReport> {
    check_measure(space, mu)?;
    check_radii(radii)?;
    for &c in centers {
        space.check(c)?;
    }
    let doubled: Vec<f64> = radii.iter().map(|r| 2.0 * r).collect();
    let per_center: Vec<(Vec<DoublingRow>, Vec<(PointId, f64)>)> = centers
        .par_iter()
        .map(|&c| {
            let row = space.row(c);
            let inner = ball_masses(&row, mu, radii);
            let outer = ball_masses(&row, mu, &doubled);
            let mut rows = Vec::new();
            let mut zero = Vec::new();
            for (k, &r) in radii.iter().enumerate() {
                if inner[k] > 0.0 {
                    rows.push(DoublingRow {
                        center: c,
                        r,
                        inner: inner[k],
                        outer: outer[k],
                        ratio: outer[k] / inner[k],
                    });
                } else {
                    zero.push((c, r));
                }
            }
            (rows, zero)
        })
        .collect();
    let mut rows = Vec::new();
    let mut zero_balls = Vec::new();
    for (r, z) in per_center {
        rows.extend(r);
        zero_balls.extend(z);
    }
    let estimate = rows.iter().map(|r| r.ratio).fold(1.0, f64::max);
    Ok(DoublingReport {
        estimate,
        rows,
        zero_balls,
    })
}

/// Vertex upper gradient: the largest slope `|u(v) - u(w)| / len(e)` over
/// the edges at each vertex.
pub fn vertex_gradient(g: &WeightedGraph, u: &ScalarField) -> Result<Vec<f64>> {
    if u.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values but the graph has {} vertices",
            u.len(),
            g.vertex_count()
        )));
    }
    let vals = u.values();
    Ok((0..g.vertex_count())
        .map(|v| {
            g.incident(v)
                .iter()
                .map(|&(w, id)| (vals[v] - vals[w]).abs() / g.edge(id).len)
                .fold(0.0, f64::max)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub name: String,
    pub values: ScalarField,
}

/// Coordinate functions (when the points have coordinates), distances to
/// the first, middle and last point, and `random` seeded smooth fields
/// `sum_k a_k cos(w_k d(x, z_k) + phi_k)` with three random anchors each.
pub fn default_test_functions(space: &MetricSpace, seed: u64, random: usize) -> Result<Vec<TestFunction>> {
    let n = space.len();
    if n == 0 {
        return Err(Error::InvalidArgument("empty space".into()));
    }
    let mut out = Vec::new();
    if let Some(sample) = space.as_formula() {
        if let Some(pts) = sample.embedded() {
            for (axis, name) in ["x", "y"].into_iter().enumerate() {
                let values = ScalarField::new(pts.iter().map(|p| p[axis]).collect())?;
                if values.values().iter().any(|&v| v != values.values()[0]) {
                    out.push(TestFunction {
                        name: format!("coordinate:{name}"),
                        values,
                    });
                }
            }
        } else if sample.points().iter().all(|p| p.scalar().is_some()) {
            out.push(TestFunction {
                name: "coordinate:t".into(),
                values: ScalarField::new(sample.points().iter().map(|p| p.scalar().unwrap_or(0.0)).collect())?,
            });
        }
    }
    let mut anchors = vec![0, n / 2, n - 1];
    anchors.dedup();
    for a in anchors {
        let row = space.row(PointId(a));
        out.push(TestFunction {
            name: format!("distance:{a}"),
            values: ScalarField::new(row.into_iter().map(|d| if d.is_finite() { d } else { 0.0 }).collect())?,
        });
    }
    let diam = space.diameter().max(f64::MIN_POSITIVE);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..random {
        let terms: Vec<(f64, f64, f64, usize)> = (0..3)
            .map(|_| {
                let a = rng.gen_range(-1.0..1.0);
                let w = rng.gen_range(1.0..4.0) * std::f64::consts::PI / diam;
                let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                let z = ((rng.gen_range(0.0..1.0) * n as f64) as usize).min(n - 1);
                (a, w, phi, z)
            })
            .collect();
        let rows: Vec<Vec<f64>> = terms.iter().map(|t| space.row(PointId(t.3))).collect();
        let values = (0..n)
            .map(|x| {
                terms
                    .iter()
                    .zip(&rows)
                    .map(|(&(a, w, phi, _), row)| if row[x].is_finite() { a * (w * row[x] + phi).cos() } else { 0.0 })
                    .sum()
            })
            .collect();
        out.push(TestFunction {
            name: format!("random:{seed}:{k}"),
            values: ScalarField::new(values)?,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BallStatus {
    Measured,
    /// Both sides vanish.
    Skipped,
    /// Positive oscillation with vanishing gradient average: no finite
    /// constant exists.
    FailureWitness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareRow {
    pub function: usize,
    pub center: PointId,
    pub r: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
    pub status: BallStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoincareEstimate {
    /// Largest finite ratio; `0` when every ball was skipped.
    pub estimate: f64,
    pub lambda: f64,
    pub p: f64,
    pub test_functions: Vec<String>,
    pub failure_witnesses: usize,
    pub rows: Vec<PoincareRow>,
}

impl PoincareEstimate {
    pub fn has_failure(&self) -> bool {
        self.failure_witnesses > 0
    }
}

/// Ratios `avg_B |u - u_B| / (r * (avg_{lambda B} g^p)^(1/p))` over balls
/// `B = B(x, r)` of `space` and the given test functions, with `g` the
/// [`vertex_gradient`] of `u` on `graph` (same vertex set as `space`).
#[allow(clippy::too_many_arguments)]
pub fn poincare_constant(
    space: &MetricSpace,
    graph: &WeightedGraph,
    mu: &Measure,
    p: f64,
    lambda: f64,
    tests: &[TestFunction],
    centers: &[PointId],
    radii: &[f64],
) -> Result<PoincareEstimate> {
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(Error::InvalidDilation(lambda));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidArgument(format!("exponent {p} must be a finite real >= 1")));
    }
    check_measure(space, mu)?;
    check_radii(radii)?;
    if graph.vertex_count() != space.len() {
        return Err(Error::InvalidArgument("gradient graph and space have different sizes".into()));
    }
    for &c in centers {
        space.check(c)?;
    }
    let gradients = tests
        .iter()
        .map(|t| {
            t.values.ensure_matches(space)?;
            vertex_gradient(graph, &t.values)
        })
        .collect::<Result<Vec<_>>>()?;
    let rows_by_center: Vec<Vec<PoincareRow>> = centers
        .par_iter()
        .map(|&c| {
            let dist = space.row(c);
            let mut rows = Vec::new();
            for &r in radii {
                let ball: Vec<usize> = (0..dist.len()).filter(|&i| dist[i] < r).collect();
                let big: Vec<usize> = (0..dist.len()).filter(|&i| dist[i] < lambda * r).collect();
                let mass: f64 = ball.iter().map(|&i| mu.weight(i)).sum();
                let big_mass: f64 = big.iter().map(|&i| mu.weight(i)).sum();
                if mass <= 0.0 || big_mass <= 0.0 {
                    continue;
                }
                for (k, (t, g)) in tests.iter().zip(&gradients).enumerate() {
                    let u = t.values.values();
                    let mean = ball.iter().map(|&i| mu.weight(i) * u[i]).sum::<f64>() / mass;
                    let lhs = ball.iter().map(|&i| mu.weight(i) * (u[i] - mean).abs()).sum::<f64>() / mass;
                    let rhs = (big.iter().map(|&i| mu.weight(i) * g[i].powf(p)).sum::<f64>() / big_mass).powf(1.0 / p);
                    // oscillation below round-off of the mean counts as zero
                    let scale = ball.iter().map(|&i| u[i].abs()).fold(0.0, f64::max);
                    let lhs_zero = lhs <= 1e-13 * scale.max(f64::MIN_POSITIVE);
                    let (ratio, status) = if rhs > 0.0 {
                        (Some(lhs / (r * rhs)), BallStatus::Measured)
                    } else if lhs_zero {
                        (None, BallStatus::Skipped)
                    } else {
                        (None, BallStatus::FailureWitness)
                    };
                    rows.push(PoincareRow {
                        function: k,
                        center: c,
                        r,
                        lhs,
                        rhs,
                        ratio,
                        status,
                    });
                }
            }
            rows
        })
        .collect();
    let rows: Vec<PoincareRow> = rows_by_center.into_iter().flatten().collect();
    Ok(PoincareEstimate {
        estimate: rows.iter().filter_map(|r| r.ratio).fold(0.0, f64::max),
        lambda,
        p,
        test_functions: tests.iter().map(|t| t.name.clone()).collect(),
        failure_witnesses: rows.iter().filter(|r| r.status == BallStatus::FailureWitness).count(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::DistanceMatrix;

    fn path_space(n: usize, step: f64) -> (MetricSpace, WeightedGraph) {
        let g = WeightedGraph::path(n, step);
        (MetricSpace::Graph(g.clone()), g)
    }

    #[test]
    fn doubling_single_point_and_line() {
        let one = MetricSpace::Matrix(DistanceMatrix::new(vec![vec![0.0]]).unwrap());
        let r = doubling_constant(&one, &Measure::counting(1), &[PointId(0)], &[1.0]).unwrap();
        assert_eq!(r.estimate, 1.0);
        let (s, _) = path_space(101, 0.01);
        let r = doubling_constant(&s, &Measure::counting(101), &[PointId(50)], &[0.105]).unwrap();
        // radius 0.105 holds 21 points, radius 0.21 holds 41
        assert!((r.estimate - 41.0 / 21.0).abs() < 1e-12);
    }

    #[test]
    fn zero_measure_balls_are_flagged() {
        let (s, _) = path_space(3, 1.0);
        let mu = Measure::vertex(vec![0.0, 1.0, 1.0]).unwrap();
        let r = doubling_constant(&s, &mu, &[PointId(0)], &[0.5, 2.0]).unwrap();
        assert_eq!(r.zero_balls, vec![(PointId(0), 0.5)]);
        assert_eq!(r.rows.len(), 1);
    }

    #[test]
    fn constant_functions_are_skipped() {
        let (s, g) = path_space(11, 1.0);
        let tests = vec![TestFunction {
            name: "constant".into(),
            values: ScalarField::constant(11, 2.0),
        }];
        let est = poincare_constant(&s, &g, &Measure::counting(11), 1.0, 1.0, &tests, &[PointId(5)], &[3.0]).unwrap();
        assert_eq!(est.estimate, 0.0);
        assert!(est.rows.iter().all(|r| r.status == BallStatus::Skipped));
    }

    #[test]
    fn identity_on_path() {
        let k = 10;
        let (s, g) = path_space(2 * k + 1, 1.0);
        let tests = vec![TestFunction {
            name: "x".into(),
            values: ScalarField::new((0..=2 * k).map(|i| i as f64).collect()).unwrap(),
        }];
        let r = k as f64 + 0.5;
        let est = poincare_constant(&s, &g, &Measure::counting(2 * k + 1), 1.0, 1.0, &tests, &[PointId(k)], &[r]).unwrap();
        // mean |x - k| over 0..=2k is k (k + 1) / (2k + 1)
        let lhs = (k * (k + 1)) as f64 / (2 * k + 1) as f64;
        assert!((est.rows[0].lhs - lhs).abs() < 1e-12);
        assert!((est.estimate - lhs / r).abs() < 1e-12);
        assert!(est.estimate <= 1.0);
    }

    #[test]
    fn disconnected_gradient_support_fails() {
        // two clusters joined in the metric but not in the gradient graph
        let s = MetricSpace::Matrix(
            DistanceMatrix::new(vec![
                vec![0.0, 1.0, 1.0, 1.0],
                vec![1.0, 0.0, 1.0, 1.0],
                vec![1.0, 1.0, 0.0, 1.0],
                vec![1.0, 1.0, 1.0, 0.0],
            ])
            .unwrap(),
        );
        let g = WeightedGraph::new(4, vec![(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let tests = vec![TestFunction {
            name: "indicator".into(),
            values: ScalarField::new(vec![1.0, 1.0, 0.0, 0.0]).unwrap(),
        }];
        let est = poincare_constant(&s, &g, &Measure::counting(4), 1.0, 1.0, &tests, &[PointId(0)], &[2.0]).unwrap();
        assert!(est.has_failure());
        assert!(matches!(
            poincare_constant(&s, &g, &Measure::counting(4), 1.0, 0.5, &tests, &[PointId(0)], &[2.0]),
            Err(Error::InvalidDilation(_))
        ));
    }

    #[test]
    fn default_family_is_seeded() {
        let (s, _) = path_space(50, 0.1);
        let a = default_test_functions(&s, 3, 20).unwrap();
        let b = default_test_functions(&s, 3, 20).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 23);
        let c = default_test_functions(&s, 4, 20).unwrap();
        assert_ne!(a, c);
    }
}
