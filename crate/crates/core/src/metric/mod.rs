//! Finite metric spaces: explicit distance matrices, weighted graphs with
//! their shortest-path metric, and samples of closed-form spaces.

mod formula;
mod graph;
pub mod json;
mod neighbors;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use formula::{
    ball_sequence_disc, ball_sequence_index, comb_component, cusp_point, halfline_profile, CombComponent,
    FormulaPoint, FormulaSample, FormulaSpace, SLIT_HALF_WIDTH,
};
pub use graph::{Edge, WeightedGraph};
pub use neighbors::Neighborhoods;

/// Default tolerance for metric-axiom checks.
pub const DEFAULT_METRIC_TOL: f64 = 1e-9;

/// Index of a point in a finite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointId(pub usize);

impl std::fmt::Display for PointId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense symmetric distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Only the shape is checked here; the values are the subject of
    /// [`verify_metric_axioms`].
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::MalformedSpace("empty distance matrix".into()));
        }
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::MalformedSpace(format!(
                    "row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64 + Sync) -> Self {
        let data = (0..n * n)
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / n, k % n);
                if i == j {
                    0.0
                } else {
                    f(i, j)
                }
            })
            .collect();
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// A finite metric space in one of its three representations.
#[derive(Clone, Debug)]
pub enum MetricSpace {
    Matrix(DistanceMatrix),
    Graph(WeightedGraph),
    Formula(FormulaSample),
}

impl MetricSpace {
    pub fn len(&self) -> usize {
        match self {
            MetricSpace::Matrix(m) => m.len(),
            MetricSpace::Graph(g) => g.vertex_count(),
            MetricSpace::Formula(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            MetricSpace::Matrix(_) => "matrix",
            MetricSpace::Graph(_) => "graph",
            MetricSpace::Formula(_) => "formula",
        }
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> {
        (0..self.len()).map(PointId)
    }

    pub fn check(&self, x: PointId) -> Result<()> {
        if x.0 < self.len() {
            Ok(())
        } else {
            Err(Error::InvalidPoint {
                index: x.0,
                len: self.len(),
            })
        }
    }

    pub fn as_graph(&self) -> Option<&WeightedGraph> {
        match self {
            MetricSpace::Graph(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_formula(&self) -> Option<&FormulaSample> {
        match self {
            MetricSpace::Formula(s) => Some(s),
            _ => None,
        }
    }

    /// Distance with `+inf` between different components of a graph.
    /// Callers must have validated the indices.
    pub fn distance_or_inf(&self, x: PointId, y: PointId) -> f64 {
        match self {
            MetricSpace::Matrix(m) => m.get(x.0, y.0),
            MetricSpace::Graph(g) => g.shortest_path_row(x.0)[y.0],
            MetricSpace::Formula(s) => s.distance(x.0, y.0),
        }
    }

    /// Distance between two points; pairs in different graph components are
    /// an error rather than `+inf`.
    pub fn distance(&self, x: PointId, y: PointId) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        let d = self.distance_or_inf(x, y);
        if d.is_infinite() {
            Err(Error::Unreachable { from: x, to: y })
        } else {
            Ok(d)
        }
    }

    /// All distances from `x`, `+inf` for unreachable graph vertices.
    pub fn row(&self, x: PointId) -> Vec<f64> {
        match self {
            MetricSpace::Matrix(m) => m.row(x.0).to_vec(),
            MetricSpace::Graph(g) => g.shortest_path_row(x.0).to_vec(),
            MetricSpace::Formula(s) => (0..s.len()).map(|j| s.distance(x.0, j)).collect(),
        }
    }

    /// Largest finite distance.
    pub fn diameter(&self) -> f64 {
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                self.row(PointId(i))
                    .into_iter()
                    .filter(|d| d.is_finite())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Smallest positive distance (the sampling resolution). `None` when all
    /// points coincide or are mutually unreachable.
    pub fn resolution(&self) -> Option<f64> {
        let r = (0..self.len())
            .into_par_iter()
            .map(|i| {
                self.row(PointId(i))
                    .into_iter()
                    .filter(|&d| d > 0.0)
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(|| f64::INFINITY, f64::min);
        r.is_finite().then_some(r)
    }

    /// Index for closed-ball queries `0 < d(x, y) <= radius`.
    pub fn neighborhoods(&self, radius: f64) -> Neighborhoods<'_> {
        Neighborhoods::new(self, radius)
    }
}

/// A real-valued function on the points of a finite space.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "field value at point {i} is not finite"
            )));
        }
        Ok(Self { values })
    }

    pub fn from_fn(space: &MetricSpace, f: impl Fn(PointId) -> f64) -> Result<Self> {
        Self::new(space.points().map(f).collect())
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, x: PointId) -> f64 {
        self.values[x.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &ScalarField) -> Self {
        Self {
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn ensure_matches(&self, space: &MetricSpace) -> Result<()> {
        if self.len() == space.len() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "field has {} values but the space has {} points",
                self.len(),
                space.len()
            )))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureFlavor {
    Vertex,
    Edge,
    Counting,
}

/// Nonnegative weights on points (vertex, counting) or on graph edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    flavor: MeasureFlavor,
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(flavor: MeasureFlavor, weights: Vec<f64>) -> Result<Self> {
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "measure weight {w} is not a nonnegative real"
            )));
        }
        if weights.iter().sum::<f64>() <= 0.0 {
            return Err(Error::InvalidArgument("measure has zero total mass".into()));
        }
        if flavor == MeasureFlavor::Counting && weights.iter().any(|&w| w != 1.0) {
            return Err(Error::InvalidArgument("counting measure must have unit weights".into()));
        }
        Ok(Self { flavor, weights })
    }

    pub fn counting(n: usize) -> Self {
        Self {
            flavor: MeasureFlavor::Counting,
            weights: vec![1.0; n],
        }
    }

    pub fn vertex(weights: Vec<f64>) -> Result<Self> {
        Self::new(MeasureFlavor::Vertex, weights)
    }

    pub fn edge(weights: Vec<f64>) -> Result<Self> {
        Self::new(MeasureFlavor::Edge, weights)
    }

    pub fn flavor(&self) -> MeasureFlavor {
        self.flavor
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn is_on_points(&self) -> bool {
        self.flavor != MeasureFlavor::Edge
    }

    pub fn mass<'a>(&self, points: impl IntoIterator<Item = &'a PointId>) -> f64 {
        points.into_iter().map(|p| self.weights[p.0]).sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TriangleViolation {
    pub x: PointId,
    pub y: PointId,
    pub via: PointId,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxiomReport {
    pub points: usize,
    pub tolerance: f64,
    pub max_defect: f64,
    pub violations: Vec<TriangleViolation>,
    pub asymmetric_pairs: Vec<(PointId, PointId)>,
    pub nonzero_diagonal: Vec<PointId>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.asymmetric_pairs.is_empty() && self.nonzero_diagonal.is_empty()
    }
}

/// Brute-force check of the metric axioms over all triples.
///
/// Triangle violations are reported once per unordered pair `x < y` with
/// the intermediate point `via`; the defect is
/// `d(x, y) - d(x, via) - d(via, y)`.
pub fn verify_metric_axioms(space: &MetricSpace, tol: f64) -> Result<AxiomReport> {
    if space.is_empty() {
        return Err(Error::InvalidArgument("space has no points".into()));
    }
    if !(tol >= 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be nonnegative")));
    }
    let n = space.len();
    let matrix = match space {
        MetricSpace::Matrix(m) => m.clone(),
        other => DistanceMatrix::from_fn(n, |i, j| other.distance_or_inf(PointId(i), PointId(j))),
    };
    for i in 0..n {
        for j in 0..n {
            let d = matrix.get(i, j);
            if d.is_nan() || d < 0.0 {
                return Err(Error::MalformedSpace(format!("d({i}, {j}) = {d}")));
            }
        }
    }
    let mut nonzero_diagonal = Vec::new();
    let mut asymmetric_pairs = Vec::new();
    for i in 0..n {
        if matrix.get(i, i) > tol {
            nonzero_diagonal.push(PointId(i));
        }
        for j in i + 1..n {
            if (matrix.get(i, j) - matrix.get(j, i)).abs() > tol {
                asymmetric_pairs.push((PointId(i), PointId(j)));
            }
        }
    }
    let per_row: Vec<(f64, Vec<TriangleViolation>)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let row_x = matrix.row(x);
            let mut max_defect = 0.0f64;
            let mut found = Vec::new();
            for y in x + 1..n {
                let dxy = row_x[y];
                if dxy.is_infinite() {
                    continue;
                }
                for z in 0..n {
                    if z == x || z == y {
                        continue;
                    }
                    let defect = dxy - row_x[z] - matrix.get(z, y);
                    if defect > max_defect {
                        max_defect = defect;
                    }
                    if defect > tol {
                        found.push(TriangleViolation {
                            x: PointId(x),
                            y: PointId(y),
                            via: PointId(z),
                            defect,
                        });
                    }
                }
            }
            (max_defect, found)
        })
        .collect();
    let mut max_defect = 0.0f64;
    let mut violations = Vec::new();
    for (m, v) in per_row {
        max_defect = max_defect.max(m);
        violations.extend(v);
    }
    Ok(AxiomReport {
        points: n,
        tolerance: tol,
        max_defect,
        violations,
        asymmetric_pairs,
        nonzero_diagonal,
    })
}

/// Open ball `{y : d(center, y) < r}`, in increasing index order.
pub fn ball(space: &MetricSpace, center: PointId, r: f64) -> Result<Vec<PointId>> {
    space.check(center)?;
    if !(r > 0.0) {
        return Err(Error::InvalidArgument(format!("radius {r} must be positive")));
    }
    Ok(space
        .row(center)
        .into_iter()
        .enumerate()
        .filter(|(_, d)| *d < r)
        .map(|(i, _)| PointId(i))
        .collect())
}

/// Evaluates the formula rule pairwise into an explicit matrix. The returned
/// provenance maps each `PointId` back to its parameter.
pub fn sample_formula_space(
    space: &FormulaSpace,
    points: Vec<FormulaPoint>,
) -> Result<(MetricSpace, Vec<FormulaPoint>)> {
    let sample = FormulaSample::new(space.clone(), points)?;
    let matrix = DistanceMatrix::from_fn(sample.len(), |i, j| sample.distance(i, j));
    Ok((MetricSpace::Matrix(matrix), sample.points().to_vec()))
}

/// Graph on the same points with an edge `x - y` of length `d(x, y)`
/// whenever `0 < d(x, y) < eps`.
pub fn epsilon_graph(space: &MetricSpace, eps: f64) -> Result<WeightedGraph> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("epsilon {eps} must be positive")));
    }
    let hood = space.neighborhoods(eps);
    let lists: Vec<Vec<(usize, usize, f64)>> = (0..space.len())
        .into_par_iter()
        .map(|i| {
            hood.of(PointId(i))
                .into_iter()
                .filter(|&(j, d)| j.0 > i && d < eps)
                .map(|(j, d)| (i, j.0, d))
                .collect()
        })
        .collect();
    WeightedGraph::new(space.len(), lists.into_iter().flatten().collect())
}
