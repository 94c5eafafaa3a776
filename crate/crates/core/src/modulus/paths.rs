//! Walks as edge sequences, shortest-walk separation and simple-path
//! enumeration.

use serde::Serialize;

use crate::metric::WeightedGraph;

/// A walk given by its vertices and the edges between them, so parallel
/// edges stay distinguishable.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgePath {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl EdgePath {
    /// Walk along the shortest edge between consecutive vertices; `None` if
    /// some consecutive pair is not adjacent.
    pub fn from_vertices(g: &WeightedGraph, vertices: &[usize]) -> Option<Self> {
        if vertices.len() < 2 || vertices.iter().any(|&v| v >= g.vertex_count()) {
            return None;
        }
        let edges = vertices
            .windows(2)
            .map(|w| g.edge_between(w[0], w[1]))
            .collect::<Option<Vec<_>>>()?;
        Some(Self {
            vertices: vertices.to_vec(),
            edges,
        })
    }

    pub fn length(&self, g: &WeightedGraph) -> f64 {
        self.edges.iter().map(|&e| g.edge(e).len).sum()
    }

    /// `sum rho(e) len(e)` over traversed edges, with multiplicity.
    pub fn integral(&self, g: &WeightedGraph, rho: &[f64]) -> f64 {
        self.edges.iter().map(|&e| rho[e] * g.edge(e).len).sum()
    }

    /// Constraint row: `len(e)` times the number of traversals of `e`.
    pub fn row(&self, g: &WeightedGraph) -> Vec<f64> {
        let mut row = vec![0.0; g.edges().len()];
        for &e in &self.edges {
            row[e] += g.edge(e).len;
        }
        row
    }

    pub fn is_simple(&self) -> bool {
        let mut seen = self.vertices.clone();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    fn reversed(&self) -> Self {
        let mut vertices = self.vertices.clone();
        let mut edges = self.edges.clone();
        vertices.reverse();
        edges.reverse();
        Self { vertices, edges }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

/// Follows a shortest-path table from `start` back to one of its sources.
/// Among tied predecessors the smallest vertex index wins, then the lightest
/// edge, then the lowest edge id.
pub(crate) fn trace(g: &WeightedGraph, table: &[(f64, usize)], start: usize, weight: &dyn Fn(usize) -> f64) -> EdgePath {
    let mut vertices = vec![start];
    let mut edges = Vec::new();
    let mut v = start;
    while table[v].1 > 0 {
        let (dv, hv) = table[v];
        let mut pick: Option<(usize, usize)> = None;
        for &(w, id) in g.incident(v) {
            if let Some((pw, pid)) = pick {
                if w != pw {
                    break;
                }
                if weight(id) < weight(pid) && table[w].1 + 1 == hv && close(table[w].0 + weight(id), dv) {
                    pick = Some((w, id));
                }
                continue;
            }
            if table[w].1 != usize::MAX && table[w].1 + 1 == hv && close(table[w].0 + weight(id), dv) {
                pick = Some((w, id));
            }
        }
        let (w, id) = pick.expect("shortest-path table has a predecessor");
        vertices.push(w);
        edges.push(id);
        v = w;
    }
    EdgePath { vertices, edges }
}

/// Candidate cheapest walks from `sources` to `targets` under the edge
/// weights: the overall cheapest one first, then the cheapest walk through
/// each edge (both orientations) that stays simple and only touches the
/// endpoint sets at its ends. Deduplicated, in deterministic order.
pub(crate) fn separation_candidates(
    g: &WeightedGraph,
    sources: &[usize],
    targets: &[usize],
    weight: &dyn Fn(usize) -> f64,
    through_edges: bool,
) -> Vec<(f64, EdgePath)> {
    let from_s = g.dijkstra_with(sources, weight);
    let from_t = g.dijkstra_with(targets, weight);
    let mut in_s = vec![false; g.vertex_count()];
    let mut in_t = vec![false; g.vertex_count()];
    for &s in sources {
        in_s[s] = true;
    }
    for &t in targets {
        in_t[t] = true;
    }
    let mut out = Vec::new();
    let best = targets
        .iter()
        .copied()
        .filter(|&t| from_s[t].0.is_finite())
        .min_by(|&a, &b| {
            from_s[a]
                .0
                .total_cmp(&from_s[b].0)
                .then(from_s[a].1.cmp(&from_s[b].1))
                .then(a.cmp(&b))
        });
    let Some(t) = best else { return out };
    out.push((from_s[t].0, trace(g, &from_s, t, weight).reversed()));

    if through_edges {
        for (id, e) in g.edges().iter().enumerate() {
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if in_t[a] || in_s[b] || !from_s[a].0.is_finite() || !from_t[b].0.is_finite() {
                    continue;
                }
                let total = from_s[a].0 + weight(id) + from_t[b].0;
                let head = trace(g, &from_s, a, weight).reversed();
                let tail = trace(g, &from_t, b, weight);
                let mut vertices = head.vertices;
                vertices.extend(&tail.vertices);
                let mut edges = head.edges;
                edges.push(id);
                edges.extend(&tail.edges);
                let path = EdgePath { vertices, edges };
                let interior = &path.vertices[1..path.vertices.len() - 1];
                if path.is_simple() && interior.iter().all(|&v| !in_s[v] && !in_t[v]) {
                    out.push((total, path));
                }
            }
        }
    }
    let mut seen = std::collections::HashSet::new();
    out.retain(|(_, p)| seen.insert(p.clone()));
    out
}

/// All vertex-simple walks from a vertex of `sources` to a vertex of
/// `targets`; `None` once more than `limit` are found.
pub(crate) fn simple_paths(g: &WeightedGraph, sources: &[usize], targets: &[usize], limit: usize) -> Option<Vec<EdgePath>> {
    let mut is_target = vec![false; g.vertex_count()];
    for &t in targets {
        is_target[t] = true;
    }
    let mut out = Vec::new();
    let mut on_path = vec![false; g.vertex_count()];
    for &s in sources {
        let mut path = EdgePath {
            vertices: vec![s],
            edges: Vec::new(),
        };
        on_path[s] = true;
        if !extend(g, &is_target, &mut on_path, &mut path, &mut out, limit, &|_| true) {
            return None;
        }
        on_path[s] = false;
    }
    Some(out)
}

/// All vertex-simple walks with at least one edge that traverse an edge of
/// `marked`, each undirected walk listed once.
pub(crate) fn simple_paths_through(g: &WeightedGraph, marked: &[bool], limit: usize) -> Option<Vec<EdgePath>> {
    let everyone = vec![true; g.vertex_count()];
    let mut out = Vec::new();
    let mut on_path = vec![false; g.vertex_count()];
    let keep = |p: &EdgePath| {
        p.edges.iter().any(|&e| marked[e]) && p.vertices[0] < p.vertices[p.vertices.len() - 1]
    };
    for s in 0..g.vertex_count() {
        let mut path = EdgePath {
            vertices: vec![s],
            edges: Vec::new(),
        };
        on_path[s] = true;
        if !extend(g, &everyone, &mut on_path, &mut path, &mut out, limit, &keep) {
            return None;
        }
        on_path[s] = false;
    }
    Some(out)
}

fn extend(
    g: &WeightedGraph,
    is_target: &[bool],
    on_path: &mut [bool],
    path: &mut EdgePath,
    out: &mut Vec<EdgePath>,
    limit: usize,
    keep: &dyn Fn(&EdgePath) -> bool,
) -> bool {
    let v = *path.vertices.last().expect("nonempty path");
    if !path.edges.is_empty() && is_target[v] && keep(path) {
        if out.len() == limit {
            return false;
        }
        out.push(path.clone());
    }
    for &(w, id) in g.incident(v) {
        if on_path[w] {
            continue;
        }
        on_path[w] = true;
        path.vertices.push(w);
        path.edges.push(id);
        let ok = extend(g, is_target, on_path, path, out, limit, keep);
        path.vertices.pop();
        path.edges.pop();
        on_path[w] = false;
        if !ok {
            return false;
        }
    }
    true
}
