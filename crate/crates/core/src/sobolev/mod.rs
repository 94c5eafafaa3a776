//! Gradients on finite spaces: minimal Hajłasz gradients, upper gradients
//! along curves, the discrete Newtonian seminorm, and the report comparing
//! the sup-norm seminorms of one function.

mod poincare;

use rayon::prelude::*;
use serde::Serialize;

pub use poincare::{
    default_test_functions, doubling_constant, poincare_constant, vertex_gradient, BallStatus, DoublingReport,
    DoublingRow, PoincareEstimate, PoincareRow, TestFunction,
};

use crate::curves::{line_integral, Curve, Density};
use crate::error::{Error, Result};
use crate::lipschitz::{global_lip_constant, lip_field, sup_lip, ScaleSchedule};
use crate::metric::{epsilon_graph, Measure, MetricSpace, PointId, ScalarField, WeightedGraph};
use crate::modulus::Exponent;
use crate::solver::{lp, qp};

/// Relative slack allowed between the sampled seminorms in a
/// [`NormChainReport`].
pub const CHAIN_SLACK: f64 = 0.02;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HajlaszGradient {
    pub g: Vec<f64>,
    /// `sup g` for the sup-norm problem, `(sum mu g^p)^(1/p)` otherwise.
    pub value: f64,
    pub p: Exponent,
    /// Number of pair constraints in the final restricted problem.
    pub active_pairs: usize,
    pub iterations: usize,
}

fn check_space(space: &MetricSpace, f: &ScalarField) -> Result<()> {
    f.ensure_matches(space)?;
    if space.len() < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    if let MetricSpace::Matrix(m) = space {
        for i in 0..m.len() {
            if let Some(j) = (i + 1..m.len()).find(|&j| m.get(i, j) == 0.0) {
                return Err(Error::DegenerateMetric {
                    x: PointId(i),
                    y: PointId(j),
                });
            }
        }
    }
    Ok(())
}

/// Minimal `sup g` over Hajłasz gradients `|f(x) - f(y)| <= d(x, y) (g(x) + g(y))`.
///
/// A constant `t` is admissible iff every pair slope is at most `2 t`, and
/// any admissible `g` has `2 sup g >= g(x) + g(y)` for the steepest pair, so
/// the optimum is `LIP(f) / 2`, attained by the constant.
pub fn minimal_hajlasz_gradient_inf(space: &MetricSpace, f: &ScalarField) -> Result<HajlaszGradient> {
    check_space(space, f)?;
    let half = global_lip_constant(space, f)?.value / 2.0;
    Ok(HajlaszGradient {
        g: vec![half; space.len()],
        value: half,
        p: Exponent::Infinity,
        active_pairs: 0,
        iterations: 0,
    })
}

fn pair_slopes(space: &MetricSpace, f: &ScalarField) -> Vec<Vec<(usize, f64)>> {
    (0..space.len())
        .into_par_iter()
        .map(|i| {
            let row = space.row(PointId(i));
            let fi = f.values()[i];
            row.iter()
                .enumerate()
                .skip(i + 1)
                .filter(|(_, d)| d.is_finite() && **d > 0.0)
                .map(|(j, &d)| (j, (f.values()[j] - fi).abs() / d))
                .filter(|&(_, s)| s > 0.0)
                .collect()
        })
        .collect()
}

fn pair_row(n: usize, i: usize, j: usize) -> Vec<f64> {
    let mut r = vec![0.0; n];
    r[i] = 1.0;
    r[j] = 1.0;
    r
}

fn solve_pairs(
    n: usize,
    mu: &Measure,
    pairs: &[(usize, usize, f64)],
    p: Exponent,
    reference: bool,
) -> Result<Vec<f64>> {
    let rows: Vec<Vec<f64>> = pairs.iter().map(|&(i, j, _)| pair_row(n, i, j)).collect();
    let rhs: Vec<f64> = pairs.iter().map(|&(_, _, s)| s).collect();
    match p {
        Exponent::One => Ok(lp::solve_covering(mu.weights(), &rows, &rhs)?.x),
        Exponent::Two if reference => Ok(qp::solve_hildreth(mu.weights(), &rows, &rhs, 1e-14, 5_000_000)?.x),
        Exponent::Two => Ok(qp::solve(mu.weights(), &rows, &rhs, 1e-12, 500_000)?.x),
        Exponent::Infinity => unreachable!("handled by the closed form"),
    }
}

fn p_norm(mu: &Measure, g: &[f64], p: Exponent) -> f64 {
    match p {
        Exponent::One => mu.weights().iter().zip(g).map(|(m, v)| m * v).sum(),
        Exponent::Two => mu.weights().iter().zip(g).map(|(m, v)| m * v * v).sum::<f64>().sqrt(),
        Exponent::Infinity => g.iter().copied().fold(0.0, f64::max),
    }
}

fn check_mu(space: &MetricSpace, mu: &Measure) -> Result<()> {
    if !mu.is_on_points() || mu.len() != space.len() {
        return Err(Error::InvalidArgument("need a vertex measure with one weight per point".into()));
    }
    if mu.weights().iter().any(|&w| w <= 0.0) {
        return Err(Error::InvalidArgument("the measure must be strictly positive".into()));
    }
    Ok(())
}

/// Minimal `L^p(mu)` norm of a Hajłasz gradient, `p` in `{1, 2}` (`inf`
/// falls back to the closed form). Pair constraints are generated lazily:
/// each round adds, for every point, its most violated pair.
pub fn minimal_hajlasz_gradient_p(
    space: &MetricSpace,
    f: &ScalarField,
    mu: &Measure,
    p: Exponent,
) -> Result<HajlaszGradient> {
    if p == Exponent::Infinity {
        return minimal_hajlasz_gradient_inf(space, f);
    }
    check_space(space, f)?;
    check_mu(space, mu)?;
    let n = space.len();
    let slopes = pair_slopes(space, f);
    let mut active: Vec<(usize, usize, f64)> = Vec::new();
    let mut g = vec![0.0; n];
    let mut iterations = 0;
    loop {
        // most violated pair per point, under the current g
        let mut worst: Vec<Option<(f64, usize, usize, f64)>> = vec![None; n];
        for (i, row) in slopes.iter().enumerate() {
            for &(j, s) in row {
                let deficit = s - g[i] - g[j];
                if deficit > 1e-12 * s.max(1.0) {
                    for v in [i, j] {
                        if worst[v].map_or(true, |w| deficit > w.0) {
                            worst[v] = Some((deficit, i, j, s));
                        }
                    }
                }
            }
        }
        let mut added = false;
        for (_, i, j, s) in worst.into_iter().flatten() {
            if !active.iter().any(|&(a, b, _)| (a, b) == (i, j)) {
                active.push((i, j, s));
                added = true;
            }
        }
        if !added {
            break;
        }
        iterations += 1;
        if iterations > 10 * n + 10 {
            return Err(Error::IterationLimit {
                iterations,
                lower: p_norm(mu, &g, p),
                upper: f64::INFINITY,
            });
        }
        g = solve_pairs(n, mu, &active, p, false)?;
    }
    Ok(HajlaszGradient {
        value: p_norm(mu, &g, p),
        g,
        p,
        active_pairs: active.len(),
        iterations,
    })
}

/// Reference solve with every pair constraint present (Hildreth's method for
/// `p = 2`). For `p = inf` it solves the linear program
/// `min t, t >= g(x), g(x) + g(y) >= slope(x, y)`.
pub fn brute_force_hajlasz(space: &MetricSpace, f: &ScalarField, mu: &Measure, p: Exponent) -> Result<HajlaszGradient> {
    check_space(space, f)?;
    let n = space.len();
    let pairs: Vec<(usize, usize, f64)> = pair_slopes(space, f)
        .into_iter()
        .enumerate()
        .flat_map(|(i, row)| row.into_iter().map(move |(j, s)| (i, j, s)))
        .collect();
    let g = if pairs.is_empty() {
        vec![0.0; n]
    } else if p == Exponent::Infinity {
        let mut rows: Vec<Vec<f64>> = pairs
            .iter()
            .map(|&(i, j, _)| {
                let mut r = pair_row(n + 1, i, j);
                r[n] = 0.0;
                r
            })
            .collect();
        let mut rhs: Vec<f64> = pairs.iter().map(|&(_, _, s)| s).collect();
        for x in 0..n {
            let mut r = vec![0.0; n + 1];
            r[x] = -1.0;
            r[n] = 1.0;
            rows.push(r);
            rhs.push(0.0);
        }
        let mut cost = vec![0.0; n + 1];
        cost[n] = 1.0;
        let mut x = lp::solve_covering(&cost, &rows, &rhs)?.x;
        x.truncate(n);
        x
    } else {
        check_mu(space, mu)?;
        solve_pairs(n, mu, &pairs, p, true)?
    };
    Ok(HajlaszGradient {
        value: p_norm(mu, &g, p),
        g,
        p,
        active_pairs: pairs.len(),
        iterations: 1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GradientViolation {
    pub curve: usize,
    pub delta_f: f64,
    pub integral: f64,
}

/// Curves with `|f(start) - f(end)| > int_curve g + tau`. Each comparison
/// also allows for the floating-point error of summing the integral.
pub fn verify_upper_gradient(
    space: &MetricSpace,
    f: &ScalarField,
    g: &Density,
    curves: &[Curve],
    tau: f64,
) -> Result<Vec<GradientViolation>> {
    f.ensure_matches(space)?;
    if !(tau >= 0.0) {
        return Err(Error::InvalidArgument(format!("tau {tau} must be nonnegative")));
    }
    let checked = curves
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let integral = line_integral(space, c, g)?;
            let (a, b) = (f.get(c.start()), f.get(c.end()));
            let delta_f = (a - b).abs();
            let roundoff = 4.0 * (c.points().len() + 1) as f64 * f64::EPSILON * (integral + a.abs() + b.abs());
            Ok((delta_f > integral + tau + roundoff).then_some(GradientViolation {
                curve: i,
                delta_f,
                integral,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(checked.into_iter().flatten().collect())
}

/// `|f(u) - f(v)| / len(e)` on every edge: the least edge density that is an
/// upper gradient along single edges, and by telescoping along every walk.
pub fn minimal_edge_gradient(g: &WeightedGraph, f: &ScalarField) -> Result<Density> {
    if f.len() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "field has {} values but the graph has {} vertices",
            f.len(),
            g.vertex_count()
        )));
    }
    Density::on_edges(
        g.edges()
            .iter()
            .map(|e| (f.values()[e.u] - f.values()[e.v]).abs() / e.len)
            .collect(),
    )
}

/// Largest edge slope of `f` on a connected graph.
pub fn newtonian_seminorm_inf(g: &WeightedGraph, f: &ScalarField) -> Result<f64> {
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    Ok(minimal_edge_gradient(g, f)?.values().iter().copied().fold(0.0, f64::max))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComponentSeminorm {
    pub component: usize,
    pub vertices: usize,
    pub value: f64,
}

/// Largest edge slope inside each connected component.
pub fn newtonian_seminorm_by_component(g: &WeightedGraph, f: &ScalarField) -> Result<Vec<ComponentSeminorm>> {
    let slopes = minimal_edge_gradient(g, f)?;
    let labels = g.components();
    let count = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut out: Vec<ComponentSeminorm> = (0..count)
        .map(|c| ComponentSeminorm {
            component: c,
            vertices: labels.iter().filter(|&&l| l == c).count(),
            value: 0.0,
        })
        .collect();
    for (e, s) in g.edges().iter().zip(slopes.values()) {
        let c = &mut out[labels[e.u]];
        c.value = c.value.max(*s);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormChainReport {
    pub m_inf_seminorm: f64,
    pub lip_constant: f64,
    /// Sampled `sup Lip f`, the seminorm part of the D-infinity norm.
    pub d_inf_norm_value: f64,
    pub newtonian_inf_seminorm: f64,
    /// Step bound of the graph used for the Newtonian entry.
    pub resolution: f64,
    pub finest_scale: f64,
    pub slack: f64,
    pub newtonian_le_d_inf: bool,
    pub d_inf_le_lip: bool,
    pub lip_eq_twice_m_inf: bool,
    pub chain_holds: bool,
}

/// Computes the four sup-norm seminorms of `f` and checks
/// `newtonian <= sup Lip <= LIP = 2 * Hajłasz`, the first two up to a
/// relative `slack`. The Newtonian entry is taken on the epsilon-graph with
/// steps shorter than `resolution` (or on the graph itself).
pub fn norm_chain_report(
    space: &MetricSpace,
    f: &ScalarField,
    schedule: &ScaleSchedule,
    resolution: f64,
    slack: f64,
) -> Result<NormChainReport> {
    let owned;
    let graph = match space {
        MetricSpace::Graph(g) => g,
        _ => {
            owned = epsilon_graph(space, resolution)?;
            &owned
        }
    };
    let newtonian = newtonian_seminorm_inf(graph, f)?;
    let (sup, _) = sup_lip(&lip_field(space, f, schedule)?);
    let lip = global_lip_constant(space, f)?.value;
    let m_inf = minimal_hajlasz_gradient_inf(space, f)?.value;
    let newtonian_le_d_inf = newtonian <= sup * (1.0 + slack);
    let d_inf_le_lip = sup <= lip * (1.0 + slack);
    let lip_eq_twice_m_inf = lip == 2.0 * m_inf;
    Ok(NormChainReport {
        m_inf_seminorm: m_inf,
        lip_constant: lip,
        d_inf_norm_value: sup,
        newtonian_inf_seminorm: newtonian,
        resolution,
        finest_scale: schedule.finest(),
        slack,
        newtonian_le_d_inf,
        d_inf_le_lip,
        lip_eq_twice_m_inf,
        chain_holds: newtonian_le_d_inf && d_inf_le_lip && lip_eq_twice_m_inf,
    })
}
