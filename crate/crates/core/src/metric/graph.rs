use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected edge with a strictly positive length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub len: f64,
}

impl Edge {
    pub fn other(&self, w: usize) -> usize {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Weighted multigraph; its metric is the shortest-path distance.
///
/// Shortest-path rows are computed on first use and cached.
#[derive(Debug)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    // (neighbor, edge id), sorted by neighbor then edge id
    adjacency: Vec<Vec<(usize, usize)>>,
    rows: Vec<OnceLock<Vec<f64>>>,
}

impl Clone for WeightedGraph {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            edges: self.edges.clone(),
            adjacency: self.adjacency.clone(),
            rows: (0..self.n).map(|_| OnceLock::new()).collect(),
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) struct HeapEntry {
    pub dist: f64,
    pub hops: usize,
    pub node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on (dist, hops, node)
        other
            .dist
            .total_cmp(&self.dist)
            .then(other.hops.cmp(&self.hops))
            .then(other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl WeightedGraph {
    pub fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        let mut stored = Vec::with_capacity(edges.len());
        for (id, (u, v, len)) in edges.into_iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::MalformedSpace(format!(
                    "edge {id} ({u}, {v}) references a missing vertex"
                )));
            }
            if u == v {
                return Err(Error::MalformedSpace(format!("edge {id} is a self-loop at {u}")));
            }
            if !(len.is_finite() && len > 0.0) {
                return Err(Error::MalformedSpace(format!(
                    "edge {id} has length {len}; lengths must be positive"
                )));
            }
            adjacency[u].push((v, id));
            adjacency[v].push((u, id));
            stored.push(Edge { u, v, len });
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            n,
            edges: stored,
            adjacency,
            rows: (0..n).map(|_| OnceLock::new()).collect(),
        })
    }

    /// Path `0 - 1 - ... - (n-1)` with equal edge lengths.
    pub fn path(n: usize, len: f64) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i, len)).collect()).expect("valid path graph")
    }

    /// `rows x cols` grid graph with 4-neighbour edges of length `step`;
    /// vertex `(i, j)` has index `i * cols + j`.
    pub fn grid(rows: usize, cols: usize, step: f64) -> Self {
        let mut edges = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let v = i * cols + j;
                if j + 1 < cols {
                    edges.push((v, v + 1, step));
                }
                if i + 1 < rows {
                    edges.push((v, v + cols, step));
                }
            }
        }
        Self::new(rows * cols, edges).expect("valid grid graph")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: usize) -> &Edge {
        &self.edges[id]
    }

    /// `(neighbor, edge id)` pairs incident to `v`.
    pub fn incident(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Shortest edge joining `u` and `v` (lowest id on ties).
    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency[u]
            .iter()
            .filter(|(w, _)| *w == v)
            .map(|&(_, id)| id)
            .min_by(|&a, &b| self.edges[a].len.total_cmp(&self.edges[b].len).then(a.cmp(&b)))
    }

    pub fn min_edge_len(&self) -> Option<f64> {
        self.edges.iter().map(|e| e.len).min_by(f64::total_cmp)
    }

    /// Dijkstra from several sources at once with edge weights `weight(id)`;
    /// returns `(distance, hop count)` per vertex, hops counted along a
    /// fewest-edge shortest path.
    pub(crate) fn dijkstra_with(&self, sources: &[usize], weight: impl Fn(usize) -> f64) -> Vec<(f64, usize)> {
        let mut best = vec![(f64::INFINITY, usize::MAX); self.n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            best[s] = (0.0, 0);
            heap.push(HeapEntry {
                dist: 0.0,
                hops: 0,
                node: s,
            });
        }
        while let Some(HeapEntry { dist, hops, node }) = heap.pop() {
            if (dist, hops) != best[node] {
                continue;
            }
            for &(next, id) in &self.adjacency[node] {
                let nd = dist + weight(id);
                let nh = hops + 1;
                let (bd, bh) = best[next];
                if nd < bd || (nd == bd && nh < bh) {
                    best[next] = (nd, nh);
                    heap.push(HeapEntry {
                        dist: nd,
                        hops: nh,
                        node: next,
                    });
                }
            }
        }
        best
    }

    pub fn shortest_path_row(&self, source: usize) -> &[f64] {
        self.rows[source].get_or_init(|| {
            self.dijkstra_with(&[source], |id| self.edges[id].len)
                .into_iter()
                .map(|(d, _)| d)
                .collect()
        })
    }

    /// Connected component label of every vertex, labels in order of first
    /// appearance.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let mut stack = vec![start];
            label[start] = next;
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = next;
                        stack.push(w);
                    }
                }
            }
            next += 1;
        }
        label
    }

    pub fn is_connected(&self) -> bool {
        self.components().iter().all(|&c| c == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        assert!(WeightedGraph::new(2, vec![(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 1, -1.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn shortest_paths_use_cheapest_parallel_edge() {
        let g = WeightedGraph::new(3, vec![(0, 1, 2.0), (0, 1, 1.0), (1, 2, 1.0), (0, 2, 5.0)]).unwrap();
        assert_eq!(g.shortest_path_row(0), &[0.0, 1.0, 2.0]);
        assert_eq!(g.edge_between(0, 1), Some(1));
        assert_eq!(g.edge_between(0, 2), Some(3));
        assert_eq!(g.edge_between(1, 1), None);
    }

    #[test]
    fn components_labelled() {
        let g = WeightedGraph::new(5, vec![(0, 1, 1.0), (3, 4, 1.0)]).unwrap();
        assert_eq!(g.components(), vec![0, 0, 1, 2, 2]);
        assert!(!g.is_connected());
        assert!(WeightedGraph::path(4, 0.5).is_connected());
    }
}
