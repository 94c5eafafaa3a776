//! Curves, densities along them, epsilon-chains and the chain-based
//! constants (quasi-length, quasi-convexity, Semmes mean-value ratio).
//!
//! A [`Curve`] is a finite sequence of points. On a graph consecutive points
//! must be adjacent; elsewhere consecutive points are joined virtually and
//! the metric supplies the length of each step.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{epsilon_graph, MetricSpace, PointId, ScalarField, WeightedGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Curve {
    points: Vec<PointId>,
}

impl Curve {
    pub fn new(space: &MetricSpace, points: Vec<PointId>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidCurve("a curve needs at least two points".into()));
        }
        for &p in &points {
            space.check(p)?;
        }
        if let Some(w) = points.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidCurve(format!("consecutive repeat of point {}", w[0])));
        }
        if let MetricSpace::Graph(g) = space {
            if let Some(w) = points.windows(2).find(|w| g.edge_between(w[0].0, w[1].0).is_none()) {
                return Err(Error::InvalidCurve(format!("{} and {} are not adjacent", w[0], w[1])));
            }
        }
        Ok(Self { points })
    }

    pub fn from_indices(space: &MetricSpace, indices: &[usize]) -> Result<Self> {
        Self::new(space, indices.iter().map(|&i| PointId(i)).collect())
    }

    pub fn points(&self) -> &[PointId] {
        &self.points
    }

    pub fn start(&self) -> PointId {
        self.points[0]
    }

    pub fn end(&self) -> PointId {
        self.points[self.points.len() - 1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityLocation {
    Edge,
    Vertex,
}

/// Nonnegative weights on edges or points. `f64::INFINITY` is allowed as the
/// infinite sentinel.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    location: DensityLocation,
    values: Vec<f64>,
}

impl Density {
    pub fn new(location: DensityLocation, values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| v.is_nan() || **v < 0.0) {
            return Err(Error::InvalidDensity(format!("value {v} at index {i}")));
        }
        Ok(Self { location, values })
    }

    pub fn on_edges(values: Vec<f64>) -> Result<Self> {
        Self::new(DensityLocation::Edge, values)
    }

    pub fn on_vertices(values: Vec<f64>) -> Result<Self> {
        Self::new(DensityLocation::Vertex, values)
    }

    pub fn location(&self) -> DensityLocation {
        self.location
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }
}

/// Sum of `d(p_i, p_{i+1})`.
pub fn curve_length(space: &MetricSpace, curve: &Curve) -> Result<f64> {
    curve
        .points
        .windows(2)
        .map(|w| space.distance(w[0], w[1]))
        .sum()
}

/// Integral of `rho` along the curve; `+inf` when the curve meets the
/// infinite sentinel.
///
/// Edge densities sum `rho(e) * len(e)` over the traversed edges (the
/// shortest edge when a pair has parallel edges). Vertex densities use the
/// trapezoidal rule on each step.
pub fn line_integral(space: &MetricSpace, curve: &Curve, rho: &Density) -> Result<f64> {
    match rho.location {
        DensityLocation::Edge => {
            let g = space
                .as_graph()
                .ok_or_else(|| Error::InvalidDensity("edge densities need a graph".into()))?;
            if rho.values.len() != g.edges().len() {
                return Err(Error::InvalidDensity(format!(
                    "{} values for {} edges",
                    rho.values.len(),
                    g.edges().len()
                )));
            }
            let mut total = 0.0;
            for w in curve.points.windows(2) {
                let e = g.edge_between(w[0].0, w[1].0).ok_or_else(|| {
                    Error::InvalidCurve(format!("{} and {} are not adjacent", w[0], w[1]))
                })?;
                total += rho.values[e] * g.edge(e).len;
            }
            Ok(total)
        }
        DensityLocation::Vertex => {
            if rho.values.len() != space.len() {
                return Err(Error::InvalidDensity(format!(
                    "{} values for {} points",
                    rho.values.len(),
                    space.len()
                )));
            }
            if curve.points.iter().any(|p| rho.values[p.0].is_infinite()) {
                return Ok(f64::INFINITY);
            }
            let mut total = 0.0;
            for w in curve.points.windows(2) {
                let d = space.distance(w[0], w[1])?;
                total += 0.5 * (rho.values[w[0].0] + rho.values[w[1].0]) * d;
            }
            Ok(total)
        }
    }
}

/// A sequence `x = z_1, ..., z_l = y` with `d(z_i, z_{i+1}) < eps`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chain {
    pub nodes: Vec<PointId>,
    pub eps: f64,
}

impl Chain {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }
}

/// Minimal chains at a fixed `eps`, sharing one epsilon-graph.
pub struct ChainFinder {
    eps: f64,
    adjacency: Vec<Vec<usize>>,
}

impl ChainFinder {
    pub fn new(space: &MetricSpace, eps: f64) -> Result<Self> {
        let g = epsilon_graph(space, eps)?;
        let adjacency = (0..g.vertex_count())
            .map(|v| {
                let mut nbrs: Vec<usize> = g.incident(v).iter().map(|&(w, _)| w).collect();
                nbrs.sort_unstable();
                nbrs.dedup();
                nbrs
            })
            .collect();
        Ok(Self { eps, adjacency })
    }

    fn hops_to(&self, target: usize) -> Vec<usize> {
        let mut hops = vec![usize::MAX; self.adjacency.len()];
        hops[target] = 0;
        let mut queue = VecDeque::from([target]);
        while let Some(v) = queue.pop_front() {
            for &w in &self.adjacency[v] {
                if hops[w] == usize::MAX {
                    hops[w] = hops[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        hops
    }

    /// Minimal node count chain; among those, the lexicographically smallest
    /// node sequence.
    pub fn chain(&self, x: PointId, y: PointId) -> Result<Chain> {
        let n = self.adjacency.len();
        for p in [x, y] {
            if p.0 >= n {
                return Err(Error::InvalidPoint { index: p.0, len: n });
            }
        }
        let hops = self.hops_to(y.0);
        if hops[x.0] == usize::MAX {
            return Err(Error::NoChain { x, y, eps: self.eps });
        }
        let mut nodes = vec![x];
        let mut v = x.0;
        while v != y.0 {
            v = *self.adjacency[v]
                .iter()
                .find(|&&w| Some(hops[w]) == hops[v].checked_sub(1))
                .expect("a BFS predecessor exists");
            nodes.push(PointId(v));
        }
        Ok(Chain { nodes, eps: self.eps })
    }
}

pub fn epsilon_chain(space: &MetricSpace, x: PointId, y: PointId, eps: f64) -> Result<Chain> {
    space.check(x)?;
    space.check(y)?;
    ChainFinder::new(space, eps)?.chain(x, y)
}

fn check_eps_list(eps_list: &[f64]) -> Result<()> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty epsilon list".into()));
    }
    if let Some(e) = eps_list.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidArgument(format!("epsilon {e} must be positive")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KRow {
    pub x: PointId,
    pub y: PointId,
    pub epsilon: f64,
    /// Minimal chain node count.
    pub ell: usize,
    pub d: f64,
    /// `(ell - 1) * eps / (d + eps)`.
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiLengthReport {
    /// Lower bound for any quasi-length constant of the space.
    pub k_estimate: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    pub rows: Vec<KRow>,
}

/// Rows are ordered by epsilon (as given), then by pair.
pub fn quasi_length_constant(
    space: &MetricSpace,
    pairs: &[(PointId, PointId)],
    eps_list: &[f64],
) -> Result<QuasiLengthReport> {
    check_eps_list(eps_list)?;
    for &(x, y) in pairs {
        space.check(x)?;
        space.check(y)?;
    }
    let tables = eps_list
        .par_iter()
        .map(|&eps| {
            let finder = ChainFinder::new(space, eps)?;
            pairs
                .iter()
                .map(|&(x, y)| {
                    let chain = finder.chain(x, y)?;
                    let d = space.distance(x, y)?;
                    let ell = chain.node_count();
                    Ok(KRow {
                        x,
                        y,
                        epsilon: eps,
                        ell,
                        d,
                        ratio: (ell - 1) as f64 * eps / (d + eps),
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<KRow> = tables.into_iter().flatten().collect();
    Ok(QuasiLengthReport {
        k_estimate: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        eps_min: eps_list.iter().copied().fold(f64::INFINITY, f64::min),
        eps_max: eps_list.iter().copied().fold(0.0, f64::max),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvexityRow {
    pub x: PointId,
    pub y: PointId,
    pub walk_length: f64,
    pub d: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiConvexityReport {
    pub c_estimate: f64,
    /// Step bound of the walks; `None` when the graph's own edges were used.
    pub resolution: Option<f64>,
    pub rows: Vec<ConvexityRow>,
}

/// Ratio of the shortest connecting walk to the distance. Graph spaces walk
/// along their own edges; other spaces walk in the epsilon-graph with steps
/// shorter than `resolution`.
pub fn quasi_convexity_constant(
    space: &MetricSpace,
    pairs: &[(PointId, PointId)],
    resolution: Option<f64>,
) -> Result<QuasiConvexityReport> {
    let owned;
    let (walks, resolution): (&WeightedGraph, Option<f64>) = match (space, resolution) {
        (MetricSpace::Graph(g), _) => (g, None),
        (_, Some(eps)) => {
            owned = epsilon_graph(space, eps)?;
            (&owned, Some(eps))
        }
        (_, None) => {
            return Err(Error::InvalidArgument(
                "a walk resolution is required for non-graph spaces".into(),
            ))
        }
    };
    let rows = pairs
        .par_iter()
        .map(|&(x, y)| {
            let d = space.distance(x, y)?;
            let walk_length = walks.shortest_path_row(x.0)[y.0];
            if walk_length.is_infinite() {
                return Err(Error::NoChain {
                    x,
                    y,
                    eps: resolution.unwrap_or(f64::INFINITY),
                });
            }
            let ratio = if x == y { 1.0 } else { walk_length / d };
            Ok(ConvexityRow {
                x,
                y,
                walk_length,
                d,
                ratio,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuasiConvexityReport {
        c_estimate: rows.iter().map(|r| r.ratio).fold(0.0, f64::max),
        resolution,
        rows,
    })
}

/// `sup_z D_eps f(z)` over the whole space.
pub fn sup_oscillation(space: &MetricSpace, f: &ScalarField, eps: f64) -> Result<f64> {
    f.ensure_matches(space)?;
    check_eps_list(&[eps])?;
    let hood = space.neighborhoods(eps);
    let osc = (0..space.len())
        .into_par_iter()
        .map(|i| {
            let fx = f.values()[i];
            hood.of(PointId(i))
                .into_iter()
                .map(|(j, _)| (f.get(j) - fx).abs())
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(osc / eps)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemmesRow {
    pub x: PointId,
    pub y: PointId,
    pub epsilon: f64,
    pub delta_f: f64,
    pub d: f64,
    pub sup_oscillation: f64,
    /// `None` when `f` is constant at scale `eps` (not applicable).
    pub required_k: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SemmesReport {
    /// Largest applicable entry; `None` if no entry applies.
    pub max_required_k: Option<f64>,
    pub rows: Vec<SemmesRow>,
}

/// `|f(x) - f(y)| / ((d(x, y) + eps) * sup_z D_eps f(z))` per pair and epsilon.
pub fn semmes_required_k(
    space: &MetricSpace,
    f: &ScalarField,
    pairs: &[(PointId, PointId)],
    eps_list: &[f64],
) -> Result<SemmesReport> {
    check_eps_list(eps_list)?;
    let sups = eps_list
        .iter()
        .map(|&eps| sup_oscillation(space, f, eps))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(pairs.len() * eps_list.len());
    for (&eps, &sup) in eps_list.iter().zip(&sups) {
        for &(x, y) in pairs {
            let d = space.distance(x, y)?;
            let delta_f = (f.get(x) - f.get(y)).abs();
            rows.push(SemmesRow {
                x,
                y,
                epsilon: eps,
                delta_f,
                d,
                sup_oscillation: sup,
                required_k: (sup > 0.0).then(|| delta_f / ((d + eps) * sup)),
            });
        }
    }
    let max_required_k = rows
        .iter()
        .filter_map(|r| r.required_k)
        .fold(None, |m: Option<f64>, k| Some(m.map_or(k, |m| m.max(k))));
    Ok(SemmesReport { max_required_k, rows })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurveViolation {
    /// Index of the curve in the input list.
    pub curve: usize,
    pub delta_f: f64,
    pub bound: f64,
}

/// Curves with `|f(start) - f(end)| > lip_sup * length + tau`.
pub fn oscillation_along_curves_check(
    space: &MetricSpace,
    f: &ScalarField,
    curves: &[Curve],
    lip_sup: f64,
    tau: f64,
) -> Result<Vec<CurveViolation>> {
    f.ensure_matches(space)?;
    if !(lip_sup >= 0.0) {
        return Err(Error::InvalidArgument(format!("lip_sup {lip_sup} must be nonnegative")));
    }
    let mut out = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        let bound = lip_sup * curve_length(space, c)?;
        let delta_f = (f.get(c.start()) - f.get(c.end())).abs();
        if delta_f > bound + tau {
            out.push(CurveViolation {
                curve: i,
                delta_f,
                bound,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{FormulaPoint, FormulaSample, FormulaSpace};

    fn line(xs: &[f64]) -> MetricSpace {
        let pts = xs.iter().map(|&x| FormulaPoint::Scalar(x)).collect();
        MetricSpace::Formula(FormulaSample::new(FormulaSpace::Line, pts).unwrap())
    }

    fn unit_grid(n: usize) -> MetricSpace {
        line(&(0..=n).map(|i| i as f64 / n as f64).collect::<Vec<_>>())
    }

    #[test]
    fn polyline_length() {
        let s = line(&[0.0, 0.5, 1.0]);
        let c = Curve::from_indices(&s, &[0, 1, 2]).unwrap();
        assert_eq!(curve_length(&s, &c).unwrap(), 1.0);
        assert!(Curve::from_indices(&s, &[0, 0, 1]).is_err());
        assert!(Curve::from_indices(&s, &[1]).is_err());
    }

    #[test]
    fn graph_curves_must_follow_edges() {
        let g = MetricSpace::Graph(WeightedGraph::path(3, 1.0));
        assert!(Curve::from_indices(&g, &[0, 2]).is_err());
        let c = Curve::from_indices(&g, &[0, 1, 2]).unwrap();
        let rho = Density::on_edges(vec![0.25, 0.75]).unwrap();
        assert_eq!(line_integral(&g, &c, &rho).unwrap(), 1.0);
    }

    #[test]
    fn vertex_integral_and_sentinel() {
        let s = line(&[0.0, 0.5, 1.0]);
        let c = Curve::from_indices(&s, &[0, 1, 2]).unwrap();
        let one = Density::on_vertices(vec![1.0; 3]).unwrap();
        assert_eq!(line_integral(&s, &c, &one).unwrap(), 1.0);
        let zero = Density::on_vertices(vec![0.0; 3]).unwrap();
        assert_eq!(line_integral(&s, &c, &zero).unwrap(), 0.0);
        let inf = Density::on_vertices(vec![0.0, f64::INFINITY, 0.0]).unwrap();
        assert!(line_integral(&s, &c, &inf).unwrap().is_infinite());
        assert!(Density::on_vertices(vec![-1.0]).is_err());
        assert!(Density::on_vertices(vec![f64::NAN]).is_err());
    }

    #[test]
    fn chains_on_unit_interval() {
        let s = unit_grid(10);
        let c = epsilon_chain(&s, PointId(0), PointId(10), 0.15).unwrap();
        assert_eq!(c.node_count(), 11);
        let c = epsilon_chain(&s, PointId(0), PointId(1), 0.15).unwrap();
        assert_eq!(c.nodes, vec![PointId(0), PointId(1)]);
        let two = line(&[0.0, 1.0]);
        assert!(matches!(
            epsilon_chain(&two, PointId(0), PointId(1), 0.5),
            Err(Error::NoChain { .. })
        ));
    }

    #[test]
    fn chain_tie_break_is_lexicographic() {
        // 0 reaches 3 through 1 or 2, both minimal
        let m = crate::metric::DistanceMatrix::new(vec![
            vec![0.0, 1.0, 1.0, 2.0],
            vec![1.0, 0.0, 2.0, 1.0],
            vec![1.0, 2.0, 0.0, 1.0],
            vec![2.0, 1.0, 1.0, 0.0],
        ])
        .unwrap();
        let s = MetricSpace::Matrix(m);
        let c = epsilon_chain(&s, PointId(0), PointId(3), 1.5).unwrap();
        assert_eq!(c.nodes, vec![PointId(0), PointId(1), PointId(3)]);
    }

    #[test]
    fn quasi_length_on_interval() {
        // steps must be strictly shorter than eps, so the longest usable step
        // is the largest multiple of the sampling step below eps
        let n = 1000;
        let s = unit_grid(n);
        let eps_list = [0.1, 0.05, 0.0375];
        let r = quasi_length_constant(&s, &[(PointId(0), PointId(n))], &eps_list).unwrap();
        for (row, eps) in r.rows.iter().zip(eps_list) {
            let max_step = ((eps * n as f64).ceil() - 1.0) / n as f64;
            let hops = (1.0 / max_step - 1e-9).ceil();
            assert_eq!(row.ell - 1, hops as usize);
            assert!((row.ratio - hops * eps / (1.0 + eps)).abs() < 1e-12);
        }
        assert!(r.k_estimate <= 1.0 + 2.0 / n as f64 * 10.0);
        let close = quasi_length_constant(&s, &[(PointId(0), PointId(1))], &[0.1]).unwrap();
        assert!(close.k_estimate < 1.0);
    }

    #[test]
    fn convexity_of_graph_metric_is_one() {
        let g = MetricSpace::Graph(WeightedGraph::grid(4, 5, 0.3));
        let pairs: Vec<_> = (0..20).flat_map(|i| (0..20).map(move |j| (PointId(i), PointId(j)))).collect();
        let r = quasi_convexity_constant(&g, &pairs, None).unwrap();
        assert_eq!(r.c_estimate, 1.0);
    }

    #[test]
    fn semmes_on_identity() {
        let s = unit_grid(10);
        let f = ScalarField::new((0..=10).map(|i| i as f64 / 10.0).collect()).unwrap();
        let r = semmes_required_k(&s, &f, &[(PointId(0), PointId(10))], &[0.1]).unwrap();
        let k = r.max_required_k.unwrap();
        assert!((k - 1.0 / 1.1).abs() < 1e-12, "{k}");
        let c = ScalarField::constant(11, 2.0);
        let r = semmes_required_k(&s, &c, &[(PointId(0), PointId(10))], &[0.1]).unwrap();
        assert_eq!(r.max_required_k, None);
        assert_eq!(r.rows[0].required_k, None);
    }

    #[test]
    fn oscillation_check() {
        let s = unit_grid(10);
        let f = ScalarField::new((0..=10).map(|i| i as f64 / 10.0).collect()).unwrap();
        let curves = vec![
            Curve::from_indices(&s, &[0, 5, 10]).unwrap(),
            Curve::from_indices(&s, &[3, 4]).unwrap(),
        ];
        assert!(oscillation_along_curves_check(&s, &f, &curves, 1.0, 1e-12).unwrap().is_empty());
        assert_eq!(oscillation_along_curves_check(&s, &f, &curves, 0.5, 0.0).unwrap().len(), 2);
    }
}
