#![allow(dead_code)]

use metricgeo::metric::{FormulaPoint, FormulaSample, FormulaSpace, MetricSpace, WeightedGraph};
use metricgeo::modulus::{brute_force_modulus, CurveFamily, Exponent};
use metricgeo::Error;
use metricgeo::metric::Measure;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Connected multigraph: a random spanning tree plus `extra` random edges.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> WeightedGraph {
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.push((u, v, rng.gen_range(0.5..2.0)));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let mut v = rng.gen_range(0..n);
        while v == u {
            v = rng.gen_range(0..n);
        }
        edges.push((u, v, rng.gen_range(0.5..2.0)));
    }
    WeightedGraph::new(n, edges).unwrap()
}

pub fn random_sigma(rng: &mut ChaCha8Rng, g: &WeightedGraph) -> Measure {
    Measure::edge((0..g.edges().len()).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap()
}

/// Random connected graphs with at most `max_paths` simple paths from 0 to
/// n - 1, together with an edge measure.
pub fn modulus_instances(rng: &mut ChaCha8Rng, count: usize, max_paths: usize) -> Vec<(WeightedGraph, Measure)> {
    let mut out = Vec::new();
    while out.len() < count {
        let n = rng.gen_range(4..=12);
        let extra = rng.gen_range(1..=n);
        let g = random_graph(rng, n, extra);
        let sigma = random_sigma(rng, &g);
        let fam = st_family(&g);
        match brute_force_modulus(&g, &sigma, &fam, Exponent::Infinity, max_paths) {
            Ok(_) => out.push((g, sigma)),
            Err(Error::PathLimit { .. }) => continue,
            Err(e) => panic!("{e}"),
        }
    }
    out
}

pub fn st_family(g: &WeightedGraph) -> CurveFamily {
    CurveFamily::Connecting {
        sources: vec![0],
        targets: vec![g.vertex_count() - 1],
    }
}

pub fn line(xs: &[f64]) -> MetricSpace {
    MetricSpace::Formula(
        FormulaSample::new(FormulaSpace::Line, xs.iter().map(|&x| FormulaPoint::Scalar(x)).collect()).unwrap(),
    )
}

pub fn unit_interval(n: usize) -> MetricSpace {
    line(&(0..=n).map(|i| i as f64 / n as f64).collect::<Vec<_>>())
}

/// Max-flow value between two vertex sets with undirected capacities
/// (Edmonds-Karp on a dense matrix).
pub fn min_cut(n: usize, edges: &[(usize, usize, f64)], sources: &[usize], targets: &[usize]) -> f64 {
    let size = n + 2;
    let (s, t) = (n, n + 1);
    let mut cap = vec![vec![0.0; size]; size];
    for &(u, v, c) in edges {
        cap[u][v] += c;
        cap[v][u] += c;
    }
    for &a in sources {
        cap[s][a] = f64::INFINITY;
    }
    for &b in targets {
        cap[b][t] = f64::INFINITY;
    }
    let mut flow = 0.0;
    loop {
        let mut parent = vec![usize::MAX; size];
        parent[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..size {
                if parent[v] == usize::MAX && cap[u][v] > 1e-15 {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[t] == usize::MAX {
            return flow;
        }
        let mut push = f64::INFINITY;
        let mut v = t;
        while v != s {
            push = push.min(cap[parent[v]][v]);
            v = parent[v];
        }
        let mut v = t;
        while v != s {
            let u = parent[v];
            cap[u][v] -= push;
            cap[v][u] += push;
            v = u;
        }
        flow += push;
    }
}

/// Effective conductance between vertex sets (potential 1 on `sources`,
/// 0 on `targets`), solved by Gaussian elimination.
pub fn effective_conductance(n: usize, edges: &[(usize, usize, f64)], sources: &[usize], targets: &[usize]) -> f64 {
    let fixed: Vec<Option<f64>> = (0..n)
        .map(|v| {
            if sources.contains(&v) {
                Some(1.0)
            } else if targets.contains(&v) {
                Some(0.0)
            } else {
                None
            }
        })
        .collect();
    let free: Vec<usize> = (0..n).filter(|&v| fixed[v].is_none()).collect();
    let index = |v: usize| free.iter().position(|&w| w == v);
    let k = free.len();
    let mut a = vec![vec![0.0; k + 1]; k];
    for &(u, v, c) in edges {
        for (x, y) in [(u, v), (v, u)] {
            if let Some(i) = index(x) {
                a[i][i] += c;
                match index(y) {
                    Some(j) => a[i][j] -= c,
                    None => a[i][k] += c * fixed[y].unwrap(),
                }
            }
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
        a.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            continue;
        }
        for row in 0..k {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..=k {
                    a[row][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut phi = vec![0.0; n];
    for v in 0..n {
        phi[v] = match fixed[v] {
            Some(x) => x,
            None => {
                let i = index(v).unwrap();
                if a[i][i].abs() < 1e-300 { 0.0 } else { a[i][k] / a[i][i] }
            }
        };
    }
    edges
        .iter()
        .filter(|&&(u, v, _)| sources.contains(&u) || sources.contains(&v))
        .map(|&(u, v, c)| c * (phi[u] - phi[v]).abs())
        .sum()
}

/// Random walk with `steps` steps from `start`, as a vertex sequence.
pub fn random_walk(rng: &mut ChaCha8Rng, g: &WeightedGraph, start: usize, steps: usize) -> Vec<usize> {
    let mut walk = vec![start];
    for _ in 0..steps {
        let here = *walk.last().unwrap();
        let inc = g.incident(here);
        if inc.is_empty() {
            break;
        }
        walk.push(inc[rng.gen_range(0..inc.len())].0);
    }
    walk
}

/// `n` distinct random points of the unit square with the Euclidean metric.
pub fn random_planar(rng: &mut ChaCha8Rng, n: usize) -> MetricSpace {
    let pts = (0..n)
        .map(|_| FormulaPoint::Planar([rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)]))
        .collect();
    MetricSpace::Formula(FormulaSample::new(FormulaSpace::Plane, pts).unwrap())
}

pub fn random_field(rng: &mut ChaCha8Rng, n: usize) -> metricgeo::metric::ScalarField {
    metricgeo::metric::ScalarField::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}
