use std::collections::HashMap;

use super::{MetricSpace, PointId};

// Below this size a linear scan is as fast as building a grid.
const GRID_THRESHOLD: usize = 1024;

/// Closed-ball neighbour queries `0 < d(x, y) <= radius`.
///
/// Samples of Euclidean formula spaces are bucketed in a uniform grid with
/// cell size `radius`; everything else falls back to scanning a row.
pub struct Neighborhoods<'a> {
    space: &'a MetricSpace,
    radius: f64,
    grid: Option<HashMap<(i64, i64), Vec<u32>>>,
}

fn cell(p: [f64; 2], size: f64) -> (i64, i64) {
    ((p[0] / size).floor() as i64, (p[1] / size).floor() as i64)
}

impl<'a> Neighborhoods<'a> {
    pub fn new(space: &'a MetricSpace, radius: f64) -> Self {
        let grid = match space {
            MetricSpace::Formula(s) if s.len() > GRID_THRESHOLD && radius > 0.0 && radius.is_finite() => {
                s.embedded().map(|pts| {
                    let mut buckets: HashMap<(i64, i64), Vec<u32>> = HashMap::new();
                    for (i, &p) in pts.iter().enumerate() {
                        buckets.entry(cell(p, radius)).or_default().push(i as u32);
                    }
                    buckets
                })
            }
            _ => None,
        };
        Self { space, radius, grid }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Neighbours of `x` with their distances, in increasing index order.
    pub fn of(&self, x: PointId) -> Vec<(PointId, f64)> {
        let r = self.radius;
        match (&self.grid, self.space) {
            (Some(grid), MetricSpace::Formula(s)) => {
                let pts = s.embedded().expect("grid implies embedding");
                let (cx, cy) = cell(pts[x.0], r);
                let mut out = Vec::new();
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        if let Some(bucket) = grid.get(&(cx + dx, cy + dy)) {
                            for &j in bucket {
                                let j = j as usize;
                                if j == x.0 {
                                    continue;
                                }
                                let d = s.distance(x.0, j);
                                if d > 0.0 && d <= r {
                                    out.push((PointId(j), d));
                                }
                            }
                        }
                    }
                }
                out.sort_unstable_by_key(|(p, _)| *p);
                out
            }
            _ => match self.space {
                MetricSpace::Matrix(m) => collect(m.row(x.0), x, r),
                MetricSpace::Graph(g) => collect(g.shortest_path_row(x.0), x, r),
                MetricSpace::Formula(s) => (0..s.len())
                    .filter(|&j| j != x.0)
                    .filter_map(|j| {
                        let d = s.distance(x.0, j);
                        (d > 0.0 && d <= r).then_some((PointId(j), d))
                    })
                    .collect(),
            },
        }
    }
}

fn collect(row: &[f64], x: PointId, r: f64) -> Vec<(PointId, f64)> {
    row.iter()
        .enumerate()
        .filter(|&(j, &d)| j != x.0 && d > 0.0 && d <= r)
        .map(|(j, &d)| (PointId(j), d))
        .collect()
}
