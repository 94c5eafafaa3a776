//! Discrete p-modulus of curve families on weighted graphs.
//!
//! Densities live on edges and the measure is an edge measure `sigma`, so
//! `Mod_p(G) = inf sum_e sigma(e) rho(e)^p` over densities with
//! `sum_{e in g} rho(e) len(e) >= 1` for every walk `g` of the family
//! (`p = inf`: the largest `rho(e)` over edges of positive measure).
//!
//! [`modulus_p`] generates constraints: it solves the problem restricted to
//! an active set of walks, asks a shortest-walk oracle under the weights
//! `rho(e) len(e)` for walks whose integral is below `1 - tol`, and repeats
//! until there are none. [`brute_force_modulus`] enumerates every simple walk
//! of the family instead and serves as the reference.

mod instance;
mod paths;

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

pub use instance::{parse_exponent, FamilyDoc, ModulusInstance};
pub use paths::EdgePath;

use crate::curves::{line_integral, Curve, Density, DensityLocation};
use crate::error::{Error, Result};
use crate::metric::{Measure, MeasureFlavor, MetricSpace, WeightedGraph};
use crate::solver::{lp, qp};

pub const DEFAULT_TOL: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 200;
/// Path budget of [`brute_force_modulus`] when the caller has no opinion.
pub const DEFAULT_PATH_LIMIT: usize = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exponent {
    One,
    Two,
    Infinity,
}

impl Exponent {
    pub fn from_f64(p: f64) -> Result<Self> {
        if p == 1.0 {
            Ok(Exponent::One)
        } else if p == 2.0 {
            Ok(Exponent::Two)
        } else if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else {
            Err(Error::UnsupportedExponent(p.to_string()))
        }
    }
}

impl FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "1" | "1.0" => Ok(Exponent::One),
            "2" | "2.0" => Ok(Exponent::Two),
            "inf" | "infinity" | "oo" => Ok(Exponent::Infinity),
            other => Err(Error::UnsupportedExponent(other.to_string())),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exponent::One => "1",
            Exponent::Two => "2",
            Exponent::Infinity => "inf",
        })
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::One => s.serialize_u8(1),
            Exponent::Two => s.serialize_u8(2),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CurveFamily {
    /// Finitely many nonconstant walks.
    Explicit(Vec<EdgePath>),
    /// Every walk starting in the first set and ending in the second.
    Connecting { sources: Vec<usize>, targets: Vec<usize> },
    /// Every walk traversing at least one of the listed edges.
    ThroughEdge(Vec<usize>),
}

impl CurveFamily {
    /// Explicit family from vertex sequences (shortest edge between
    /// consecutive vertices).
    pub fn explicit_from_vertices(g: &WeightedGraph, walks: &[Vec<usize>]) -> Result<Self> {
        walks
            .iter()
            .map(|w| {
                EdgePath::from_vertices(g, w)
                    .ok_or_else(|| Error::InvalidCurve(format!("{w:?} is not a nonconstant walk of the graph")))
            })
            .collect::<Result<Vec<_>>>()
            .map(CurveFamily::Explicit)
    }

    fn validate(&self, g: &WeightedGraph) -> Result<()> {
        let n = g.vertex_count();
        match self {
            CurveFamily::Explicit(walks) => {
                for w in walks {
                    let ok = w.edges.len() + 1 == w.vertices.len()
                        && !w.edges.is_empty()
                        && w.edges.iter().enumerate().all(|(i, &e)| {
                            e < g.edges().len() && {
                                let edge = g.edge(e);
                                let (a, b) = (w.vertices[i], w.vertices[i + 1]);
                                (edge.u, edge.v) == (a, b) || (edge.v, edge.u) == (a, b)
                            }
                        });
                    if !ok {
                        return Err(Error::InvalidCurve(format!("{:?} is not a walk of the graph", w.vertices)));
                    }
                }
                Ok(())
            }
            CurveFamily::Connecting { sources, targets } => {
                if let Some(&v) = sources.iter().chain(targets).find(|&&v| v >= n) {
                    return Err(Error::InvalidPoint { index: v, len: n });
                }
                if sources.iter().any(|s| targets.contains(s)) {
                    return Err(Error::InvalidArgument("source and target sets must be disjoint".into()));
                }
                Ok(())
            }
            CurveFamily::ThroughEdge(edges) => {
                if let Some(&e) = edges.iter().find(|&&e| e >= g.edges().len()) {
                    return Err(Error::InvalidArgument(format!("edge {e} does not exist")));
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusResult {
    pub value: f64,
    pub p: Exponent,
    pub rho: Vec<f64>,
    /// Vertex sequences of the binding walks.
    pub active_paths: Vec<Vec<usize>>,
    /// Upper bound minus lower bound on the optimum.
    pub gap: f64,
    pub iterations: usize,
}

fn check_sigma(g: &WeightedGraph, sigma: &Measure) -> Result<()> {
    if sigma.flavor() != MeasureFlavor::Edge {
        return Err(Error::InvalidArgument("the modulus needs an edge measure".into()));
    }
    if sigma.len() != g.edges().len() {
        return Err(Error::InvalidArgument(format!(
            "{} measure weights for {} edges",
            sigma.len(),
            g.edges().len()
        )));
    }
    Ok(())
}

fn energy(sigma: &Measure, rho: &[f64], p: Exponent) -> f64 {
    let w = sigma.weights();
    match p {
        Exponent::One => w.iter().zip(rho).map(|(s, r)| s * r).sum(),
        Exponent::Two => w.iter().zip(rho).map(|(s, r)| s * r * r).sum(),
        Exponent::Infinity => w
            .iter()
            .zip(rho)
            .filter(|(s, _)| **s > 0.0)
            .map(|(_, r)| *r)
            .fold(0.0, f64::max),
    }
}

/// Optimum of the problem restricted to `walks`: `(rho, lower bound)`.
/// `hildreth` selects the reference QP solver for `p = 2`.
fn solve_restricted(
    g: &WeightedGraph,
    sigma: &Measure,
    walks: &[EdgePath],
    p: Exponent,
    tol: f64,
    hildreth: bool,
) -> Result<(Vec<f64>, f64)> {
    let m = g.edges().len();
    let rows: Vec<Vec<f64>> = walks.iter().map(|w| w.row(g)).collect();
    match p {
        Exponent::One => {
            let sol = lp::solve_covering(sigma.weights(), &rows, &vec![1.0; rows.len()])?;
            Ok((sol.x, sol.objective))
        }
        Exponent::Infinity => {
            let mut cost = vec![0.0; m + 1];
            cost[m] = 1.0;
            let mut full: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    r.push(0.0);
                    r
                })
                .collect();
            let mut rhs = vec![1.0; full.len()];
            for (e, &s) in sigma.weights().iter().enumerate() {
                if s > 0.0 {
                    let mut r = vec![0.0; m + 1];
                    r[e] = -1.0;
                    r[m] = 1.0;
                    full.push(r);
                    rhs.push(0.0);
                }
            }
            let sol = lp::solve_covering(&cost, &full, &rhs)?;
            let mut rho = sol.x;
            rho.truncate(m);
            Ok((rho, sol.objective))
        }
        Exponent::Two => {
            // Null edges get rho = 1/len, which satisfies every walk using them.
            let free: Vec<usize> = (0..m).filter(|&e| sigma.weight(e) > 0.0).collect();
            let mut rho = vec![0.0; m];
            for e in 0..m {
                if sigma.weight(e) == 0.0 {
                    rho[e] = 1.0 / g.edge(e).len;
                }
            }
            let reduced: Vec<Vec<f64>> = rows
                .iter()
                .filter(|r| r.iter().enumerate().all(|(e, &a)| a == 0.0 || sigma.weight(e) > 0.0))
                .map(|r| free.iter().map(|&e| r[e]).collect())
                .collect();
            let w: Vec<f64> = free.iter().map(|&e| sigma.weight(e)).collect();
            let rhs = vec![1.0; reduced.len()];
            let sol = if hildreth {
                qp::solve_hildreth(&w, &reduced, &rhs, 1e-13, 5_000_000)?
            } else {
                qp::solve(&w, &reduced, &rhs, tol.min(1e-10), 200_000)?
            };
            for (&e, &x) in free.iter().zip(&sol.x) {
                rho[e] = x;
            }
            Ok((rho, sol.objective - sol.gap))
        }
    }
}

/// Most violated walks of the family under `rho`, cheapest first:
/// `(smallest integral over the family, violated walks)`.
fn separate(g: &WeightedGraph, family: &CurveFamily, rho: &[f64], tol: f64) -> (f64, Vec<EdgePath>) {
    let weight = |id: usize| rho[id] * g.edge(id).len;
    let mut cands: Vec<(f64, EdgePath)> = match family {
        CurveFamily::Explicit(walks) => walks.iter().map(|w| (w.integral(g, rho), w.clone())).collect(),
        CurveFamily::Connecting { sources, targets } => {
            paths::separation_candidates(g, sources, targets, &weight, true)
        }
        CurveFamily::ThroughEdge(edges) => edges
            .iter()
            .map(|&e| {
                let edge = g.edge(e);
                (
                    weight(e),
                    EdgePath {
                        vertices: vec![edge.u, edge.v],
                        edges: vec![e],
                    },
                )
            })
            .collect(),
    };
    let min = cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min);
    cands.retain(|c| c.0 < 1.0 - tol);
    cands.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    (min, cands.into_iter().map(|c| c.1).collect())
}

fn check_realizable(g: &WeightedGraph, family: &CurveFamily) -> Result<bool> {
    family.validate(g)?;
    match family {
        CurveFamily::Explicit(walks) => Ok(!walks.is_empty()),
        CurveFamily::Connecting { sources, targets } => {
            if sources.is_empty() || targets.is_empty() {
                return Err(Error::EmptyFamily);
            }
            let labels = g.components();
            if sources.iter().any(|&s| targets.iter().any(|&t| labels[s] == labels[t])) {
                Ok(true)
            } else {
                Err(Error::EmptyFamily)
            }
        }
        CurveFamily::ThroughEdge(edges) => {
            if edges.is_empty() {
                Err(Error::EmptyFamily)
            } else {
                Ok(true)
            }
        }
    }
}

fn empty_result(g: &WeightedGraph, p: Exponent) -> ModulusResult {
    ModulusResult {
        value: 0.0,
        p,
        rho: vec![0.0; g.edges().len()],
        active_paths: Vec::new(),
        gap: 0.0,
        iterations: 0,
    }
}

pub fn modulus_p(g: &WeightedGraph, sigma: &Measure, family: &CurveFamily, p: Exponent, tol: f64) -> Result<ModulusResult> {
    modulus_p_with_limit(g, sigma, family, p, tol, MAX_ITERATIONS)
}

pub fn modulus_p_with_limit(
    g: &WeightedGraph,
    sigma: &Measure,
    family: &CurveFamily,
    p: Exponent,
    tol: f64,
    max_iterations: usize,
) -> Result<ModulusResult> {
    check_sigma(g, sigma)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must lie in (0, 1)")));
    }
    if !check_realizable(g, family)? {
        return Ok(empty_result(g, p));
    }
    // Seed the active set with the walk that is cheapest under rho = 1/len_min.
    let seed = 1.0 / g.min_edge_len().ok_or(Error::EmptyFamily)?;
    let (_, mut active) = separate(g, family, &vec![seed; g.edges().len()], -f64::INFINITY);
    active.truncate(1);
    if active.is_empty() {
        return Err(Error::EmptyFamily);
    }

    let mut iterations = 0;
    loop {
        iterations += 1;
        let (rho, lower) = solve_restricted(g, sigma, &active, p, tol, false)?;
        let (min_integral, violated) = separate(g, family, &rho, tol);
        let value = energy(sigma, &rho, p);
        if violated.is_empty() {
            let scale = 1.0 / min_integral.min(1.0);
            let upper = match p {
                Exponent::One | Exponent::Infinity => value * scale,
                Exponent::Two => value * scale * scale,
            };
            let active_paths = active
                .iter()
                .filter(|w| w.integral(g, &rho) <= 1.0 + 1e-6)
                .map(|w| w.vertices.clone())
                .collect();
            return Ok(ModulusResult {
                value,
                p,
                rho,
                active_paths,
                gap: (upper - lower).max(0.0),
                iterations,
            });
        }
        if iterations >= max_iterations {
            return Err(Error::IterationLimit {
                iterations,
                lower,
                upper: value / min_integral.max(f64::MIN_POSITIVE).powi(if p == Exponent::Two { 2 } else { 1 }),
            });
        }
        let before = active.len();
        for w in violated {
            if !active.contains(&w) {
                active.push(w);
            }
        }
        if active.len() == before {
            return Err(Error::Solver("separation returned only known walks".into()));
        }
    }
}

/// Reference value: every simple walk of the family is materialized (at most
/// `path_limit`) and the full program is solved at once. The `p = 2` case
/// uses Hildreth's method rather than the accelerated solver.
pub fn brute_force_modulus(
    g: &WeightedGraph,
    sigma: &Measure,
    family: &CurveFamily,
    p: Exponent,
    path_limit: usize,
) -> Result<f64> {
    check_sigma(g, sigma)?;
    if !check_realizable(g, family)? {
        return Ok(0.0);
    }
    let walks = match family {
        CurveFamily::Explicit(walks) => {
            if walks.len() > path_limit {
                return Err(Error::PathLimit { limit: path_limit });
            }
            walks.clone()
        }
        CurveFamily::Connecting { sources, targets } => paths::simple_paths(g, sources, targets, path_limit)
            .ok_or(Error::PathLimit { limit: path_limit })?,
        CurveFamily::ThroughEdge(edges) => {
            let mut marked = vec![false; g.edges().len()];
            for &e in edges {
                marked[e] = true;
            }
            paths::simple_paths_through(g, &marked, path_limit).ok_or(Error::PathLimit { limit: path_limit })?
        }
    };
    if walks.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let (rho, _) = solve_restricted(g, sigma, &walks, p, 1e-12, true)?;
    Ok(energy(sigma, &rho, p))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NullFamilyVerdict {
    /// Every curve of the family has infinite integral.
    pub condition_b: bool,
    /// Additionally the density vanishes on every cell of positive measure.
    pub condition_c: bool,
    /// Largest density value over cells of positive measure.
    pub essential_sup: f64,
    pub claim_matches: bool,
    /// Indices of curves with a finite integral.
    pub finite_curves: Vec<usize>,
}

/// Checks a density against the null-family conditions. The measure marks
/// which cells (vertices or edges, matching the density) are null.
pub fn null_family_witness_check(
    space: &MetricSpace,
    family: &[Curve],
    rho: &Density,
    measure: &Measure,
    essential_sup_claim: f64,
) -> Result<NullFamilyVerdict> {
    let cells_match = match rho.location() {
        DensityLocation::Edge => measure.flavor() == MeasureFlavor::Edge,
        DensityLocation::Vertex => measure.is_on_points(),
    };
    if !cells_match || measure.len() != rho.values().len() {
        return Err(Error::InvalidArgument("measure and density live on different cells".into()));
    }
    let mut finite_curves = Vec::new();
    for (i, c) in family.iter().enumerate() {
        if line_integral(space, c, rho)?.is_finite() {
            finite_curves.push(i);
        }
    }
    let essential_sup = rho
        .values()
        .iter()
        .zip(measure.weights())
        .filter(|(_, w)| **w > 0.0)
        .map(|(r, _)| *r)
        .fold(0.0, f64::max);
    let condition_b = finite_curves.is_empty();
    let claim_matches = essential_sup == essential_sup_claim
        || (essential_sup.is_finite()
            && (essential_sup - essential_sup_claim).abs() <= 1e-12 * essential_sup.max(1.0));
    Ok(NullFamilyVerdict {
        condition_b,
        condition_c: condition_b && essential_sup == 0.0,
        essential_sup,
        claim_matches,
        finite_curves,
    })
}
