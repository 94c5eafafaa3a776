//! Acceptance run: one PASS/FAIL line per criterion. Every criterion is
//! evaluated twice and its report compared byte for byte (criterion 10).

mod common;

use std::fmt::Write as _;
use std::process::ExitCode;

use common::*;
use metricgeo::corpus::{build_comb, build_cusp, build_halfline, build_slit_plane, cusp_ladder, CorpusSpace};
use metricgeo::curves::{line_integral, Curve, Density};
use metricgeo::lipschitz::{classify_membership, difference_quotient, lip_estimate, lip_field, sup_lip, ScaleSchedule};
use metricgeo::metric::{
    epsilon_graph, FormulaPoint, FormulaSample, FormulaSpace, Measure, MetricSpace, PointId, ScalarField,
    WeightedGraph,
};
use metricgeo::modulus::{brute_force_modulus, modulus_p, CurveFamily, EdgePath, Exponent};
use metricgeo::sobolev::{
    brute_force_hajlasz, default_test_functions, doubling_constant, minimal_edge_gradient,
    minimal_hajlasz_gradient_inf, minimal_hajlasz_gradient_p, norm_chain_report, poincare_constant,
    verify_upper_gradient, TestFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SUP_LIP_BAND: (f64, f64) = (0.98, 1.02);
const HALFLINE_QUOTIENT_TOL: f64 = 1e-12;
const CUSP_QUOTIENT_TOL: f64 = 1e-9;
const CUSP_ORIGIN_BAND: (f64, f64) = (0.98, 1.0);
const COMB_TOL: f64 = 1e-9;
const MODULUS_TOL: f64 = 1e-6;
const MOD_INF_TOL: f64 = 1e-9;
const MAX_ITERATIONS: usize = 50;
const HAJLASZ_INF_TOL: f64 = 1e-9;
const HAJLASZ_P_TOL: f64 = 1e-6;
const CHAIN_SLACK: f64 = 0.02;
const DOUBLING_LINE_MAX: f64 = 2.1;
const DOUBLING_GRID_BAND: (f64, f64) = (3.4, 4.6);
const POINCARE_PATH_MAX: f64 = 1.0;
const POINCARE_REFINEMENT: f64 = 0.2;

#[derive(Default)]
struct Outcome {
    report: String,
    failures: Vec<String>,
}

impl Outcome {
    fn check(&mut self, label: &str, ok: bool, detail: impl std::fmt::Display) {
        let _ = writeln!(self.report, "{} {label}: {detail}", if ok { "ok" } else { "FAILED" });
        if !ok {
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    fn note(&mut self, line: impl std::fmt::Display) {
        let _ = writeln!(self.report, "{line}");
    }
}

fn within(v: f64, (lo, hi): (f64, f64)) -> bool {
    v >= lo && v <= hi
}

fn field<'a>(c: &'a CorpusSpace, name: &str) -> &'a ScalarField {
    c.field(name).unwrap()
}

fn halfline() -> Outcome {
    let mut out = Outcome::default();
    let s = 50;
    let c = build_halfline(20, s).unwrap();
    let g = field(&c, "g");
    let (sup, at) = sup_lip(&lip_field(&c.space, g, &c.schedule).unwrap());
    out.check("sup Lip g", within(sup, SUP_LIP_BAND), format!("{sup:?} at {at:?}"));
    let mut worst: f64 = 0.0;
    for n in 2..=20usize {
        let q = difference_quotient(&c.space, g, PointId((n - 1) * s), PointId(n * s)).unwrap();
        let nf = n as f64;
        worst = worst.max((q - nf * nf / (2.0 * nf - 1.0)).abs());
    }
    out.check("quotients n^2/(2n-1), n = 2..20", worst <= HALFLINE_QUOTIENT_TOL, format!("max error {worst:e}"));
    let m = classify_membership(&c.space, g, &c.schedule, 2.0).unwrap();
    out.check(
        "classification",
        m.in_d && !m.in_lip && m.in_lip_loc,
        format!("in_D={} in_LIP={} in_LIP_loc={}", m.in_d, m.in_lip, m.in_lip_loc),
    );
    let witness = m.global_lip.witness;
    out.check(
        "witness pair (19, 20)",
        witness == Some((PointId(19 * s), PointId(20 * s))),
        format!("{witness:?}, LIP {:?}", m.global_lip.value),
    );
    out
}

fn cusp() -> Outcome {
    let mut out = Outcome::default();
    let t_min = 1e-3;
    let c = build_cusp(&cusp_ladder(t_min).unwrap()).unwrap();
    let g = field(&c, "g");
    for t in [1e-1, 1e-2, 1e-3] {
        let a = c.find(FormulaPoint::Scalar(t)).unwrap();
        let b = c.find(FormulaPoint::Scalar(-t)).unwrap();
        let q = difference_quotient(&c.space, g, a, b).unwrap();
        out.check(&format!("quotient 1/t at t = {t:e}"), (q - 1.0 / t).abs() <= CUSP_QUOTIENT_TOL, format!("{q:?}"));
    }
    let origin = c.find(FormulaPoint::Scalar(0.0)).unwrap();
    let reach = 1.5 * t_min * t_min;
    let schedule = ScaleSchedule::new(vec![2.0 * reach, reach]).unwrap();
    let lip = lip_estimate(&c.space, g, origin, &schedule).unwrap().value;
    out.check("Lip g at the origin", within(lip, CUSP_ORIGIN_BAND), format!("{lip:?}"));

    let coarse = build_cusp(&cusp_ladder(1e-2).unwrap()).unwrap();
    let m = classify_membership(&coarse.space, field(&coarse, "g"), &coarse.schedule, 2.0).unwrap();
    out.check(
        "classification",
        m.in_d && !m.in_lip && !m.in_lip_loc,
        format!("in_D={} in_LIP={} in_LIP_loc={}", m.in_d, m.in_lip, m.in_lip_loc),
    );
    out
}

fn comb() -> Outcome {
    let mut out = Outcome::default();
    let c = build_comb(20, 1000).unwrap();
    for (n, m) in [(3, 5), (5, 9), (10, 20)] {
        let diff = field(&c, &format!("f_{n}")).sub(field(&c, &format!("f_{m}")));
        let next = (n + 1) as f64;
        let sup = diff.sup_norm();
        out.check(
            &format!("sup |f_{n} - f_{m}|"),
            (sup - 1.0 / next.sqrt()).abs() <= COMB_TOL,
            format!("{sup:?}"),
        );
        let (lip, _) = sup_lip(&lip_field(&c.space, &diff, &c.schedule).unwrap());
        out.check(
            &format!("sup Lip(f_{n} - f_{m})"),
            (lip - 1.0 / (next * next.sqrt())).abs() <= COMB_TOL,
            format!("{lip:?}"),
        );
    }
    let coarse = build_comb(100, 1).unwrap();
    let f = field(&coarse, "f");
    let origin = coarse.find(FormulaPoint::Planar([0.0, 0.0])).unwrap();
    let mut worst: f64 = 0.0;
    for n in 1..=100usize {
        let x = coarse.find(FormulaPoint::Planar([1.0 / n as f64, 0.0])).unwrap();
        let q = difference_quotient(&coarse.space, f, x, origin).unwrap();
        worst = worst.max((q - (n as f64).sqrt()).abs());
    }
    out.check("limit quotients sqrt(n), n <= 100", worst <= COMB_TOL, format!("max error {worst:e}"));
    out
}

fn explicit_walks(rng: &mut ChaCha8Rng, g: &WeightedGraph, count: usize) -> Vec<Vec<usize>> {
    (0..count)
        .map(|_| {
            let start = rng.gen_range(0..g.vertex_count());
            let steps = rng.gen_range(1..5);
            random_walk(rng, g, start, steps)
        })
        .collect()
}

fn modulus_oracles() -> Outcome {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut iterations = 0;
    for (g, sigma) in modulus_instances(&mut rng, 25, 200) {
        let fam = st_family(&g);
        for p in [Exponent::One, Exponent::Two, Exponent::Infinity] {
            let fast = modulus_p(&g, &sigma, &fam, p, 1e-9).unwrap();
            let slow = brute_force_modulus(&g, &sigma, &fam, p, 200).unwrap();
            worst = worst.max((fast.value - slow).abs());
            iterations = iterations.max(fast.iterations);
        }
    }
    out.check("25 random graphs against brute force", worst <= MODULUS_TOL, format!("max error {worst:e}"));
    out.check("iterations", iterations <= MAX_ITERATIONS, iterations);

    for k in [1, 2, 3, 5] {
        let g = WeightedGraph::new(2, vec![(0, 1, 1.0); k]).unwrap();
        let sigma = Measure::edge(vec![1.0; k]).unwrap();
        let v = modulus_p(&g, &sigma, &st_family(&g), Exponent::Two, 1e-10).unwrap().value;
        out.check(&format!("Mod_2 of {k} parallel edges"), (v - k as f64).abs() <= MOD_INF_TOL, format!("{v:?}"));
    }

    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let g = random_graph(&mut rng, 8, 6);
        let sigma = random_sigma(&mut rng, &g);
        let count = rng.gen_range(1..6);
        let walks = explicit_walks(&mut rng, &g, count);
        let min = walks
            .iter()
            .map(|w| EdgePath::from_vertices(&g, w).unwrap().length(&g))
            .fold(f64::INFINITY, f64::min);
        let fam = CurveFamily::explicit_from_vertices(&g, &walks).unwrap();
        let v = modulus_p(&g, &sigma, &fam, Exponent::Infinity, 1e-10).unwrap().value;
        worst = worst.max((v - 1.0 / min).abs());
    }
    out.check("Mod_inf = 1/min length on 10 families", worst <= MOD_INF_TOL, format!("max error {worst:e}"));
    out
}

fn modulus_properties() -> Outcome {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut monotone, mut subadditive) = (0, 0);
    let mut iterations = 0;
    for _ in 0..50 {
        let n = rng.gen_range(5..=10);
        let g = random_graph(&mut rng, n, n);
        let sigma = random_sigma(&mut rng, &g);
        let first = explicit_walks(&mut rng, &g, 4);
        let second = explicit_walks(&mut rng, &g, 4);
        let mut mod2 = |walks: &[Vec<usize>]| {
            let fam = CurveFamily::explicit_from_vertices(&g, walks).unwrap();
            let r = modulus_p(&g, &sigma, &fam, Exponent::Two, MODULUS_TOL).unwrap();
            iterations = iterations.max(r.iterations);
            r.value
        };
        let a = mod2(&first[..2]);
        let b = mod2(&first);
        let c = mod2(&second);
        let union: Vec<Vec<usize>> = first.iter().chain(&second).cloned().collect();
        let ab = mod2(&union);
        if a > b + MODULUS_TOL {
            monotone += 1;
        }
        if ab > b + c + MODULUS_TOL {
            subadditive += 1;
        }
    }
    out.check("monotone on 50 nested pairs", monotone == 0, format!("{monotone} violations"));
    out.check("subadditive on 50 unions", subadditive == 0, format!("{subadditive} violations"));
    out.check("iterations", iterations <= MAX_ITERATIONS, iterations);
    out
}

fn pair_lip(space: &MetricSpace, f: &ScalarField) -> f64 {
    let mut best: f64 = 0.0;
    for x in space.points() {
        for y in space.points().filter(|y| y.0 > x.0) {
            best = best.max((f.get(x) - f.get(y)).abs() / space.distance(x, y).unwrap());
        }
    }
    best
}

fn hajlasz() -> Outcome {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let (mut closed, mut lp): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        let n = rng.gen_range(2..=30);
        let space = random_planar(&mut rng, n);
        let f = random_field(&mut rng, n);
        let h = minimal_hajlasz_gradient_inf(&space, &f).unwrap().value;
        closed = closed.max((h - pair_lip(&space, &f) / 2.0).abs());
        let mu = Measure::counting(n);
        lp = lp.max((h - brute_force_hajlasz(&space, &f, &mu, Exponent::Infinity).unwrap().value).abs());
    }
    out.check("sup-norm optimum = LIP/2 on 50 spaces", closed <= HAJLASZ_INF_TOL, format!("max error {closed:e}"));
    out.check("sup-norm optimum against the full LP", lp <= HAJLASZ_INF_TOL, format!("max error {lp:e}"));

    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(2..=10);
        let space = random_planar(&mut rng, n);
        let f = random_field(&mut rng, n);
        let mu = Measure::vertex((0..n).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap();
        for p in [Exponent::One, Exponent::Two] {
            let lazy = minimal_hajlasz_gradient_p(&space, &f, &mu, p).unwrap().value;
            let full = brute_force_hajlasz(&space, &f, &mu, p).unwrap().value;
            worst = worst.max((lazy - full).abs());
        }
    }
    out.check("p = 1, 2 against full-constraint solves", worst <= HAJLASZ_P_TOL, format!("max error {worst:e}"));
    out
}

fn norm_chain() -> Outcome {
    let mut out = Outcome::default();
    let n = 200;
    let space = unit_interval(n);
    let f = ScalarField::from_fn(&space, |x| x.0 as f64 / n as f64).unwrap();
    let h = 1.0 / n as f64;
    let schedule = ScaleSchedule::geometric(0.25, 0.5, 2.0 * h).unwrap();
    let r = norm_chain_report(&space, &f, &schedule, 1.5 * h, CHAIN_SLACK).unwrap();
    let values = [r.newtonian_inf_seminorm, r.d_inf_norm_value, r.lip_constant, 2.0 * r.m_inf_seminorm];
    let hi = values.iter().copied().fold(0.0, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    out.check("f(x) = x: four seminorms agree", hi <= lo * (1.0 + CHAIN_SLACK), format!("{values:?}"));

    for (n_max, floor) in [(20, 10.0), (40, 20.0)] {
        let c = build_halfline(n_max, 50).unwrap();
        let r = norm_chain_report(&c.space, field(&c, "g"), &c.schedule, 1.5 / 50.0, CHAIN_SLACK).unwrap();
        let close = |v: f64| (v - 1.0).abs() <= CHAIN_SLACK;
        if n_max == 20 {
            out.check(
                "halfline newtonian ~ sup Lip ~ 1",
                close(r.newtonian_inf_seminorm) && close(r.d_inf_norm_value),
                format!("{:?}, {:?}", r.newtonian_inf_seminorm, r.d_inf_norm_value),
            );
        }
        out.check(
            &format!("halfline n_max = {n_max}: LIP = 2 Hajlasz >= {floor}"),
            r.lip_eq_twice_m_inf && r.lip_constant >= floor,
            format!("LIP {:?}, Hajlasz {:?}", r.lip_constant, r.m_inf_seminorm),
        );
    }
    out
}

fn upper_gradients() -> Outcome {
    let mut out = Outcome::default();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let side = 50;
    let h = 1.0 / (side - 1) as f64;
    let grid = WeightedGraph::grid(side, side, h);
    let space = MetricSpace::Graph(grid.clone());
    let f = ScalarField::from_fn(&space, |v| {
        let (x, y) = ((v.0 % side) as f64 * h, (v.0 / side) as f64 * h);
        x * x + y
    })
    .unwrap();
    let schedule = ScaleSchedule::new(vec![4.0 * h, 2.0 * h, h]).unwrap();
    let lip: Vec<f64> = lip_field(&space, &f, &schedule).unwrap().iter().map(|e| e.value).collect();
    let g = Density::on_vertices(lip).unwrap();
    let curves: Vec<Curve> = (0..100)
        .map(|_| {
            let start = rng.gen_range(0..side * side);
            let steps = rng.gen_range(1..200);
            Curve::from_indices(&space, &random_walk(&mut rng, &grid, start, steps)).unwrap()
        })
        .collect();
    let bad = verify_upper_gradient(&space, &f, &g, &curves, 2.0 * h).unwrap();
    out.check("sampled Lip on the grid, 100 walks", bad.is_empty(), format!("{} violations", bad.len()));
    let slack = curves
        .iter()
        .map(|c| line_integral(&space, c, &g).unwrap() - (f.get(c.start()) - f.get(c.end())).abs())
        .fold(f64::INFINITY, f64::min);
    out.note(format!("smallest margin {slack:e}"));

    let mut bad = 0;
    for _ in 0..20 {
        let n = rng.gen_range(5..=15);
        let graph = random_graph(&mut rng, n, n);
        let space = MetricSpace::Graph(graph.clone());
        let f = random_field(&mut rng, n);
        let rho = minimal_edge_gradient(&graph, &f).unwrap();
        let curves: Vec<Curve> = (0..50)
            .map(|_| {
                let start = rng.gen_range(0..n);
                let steps = rng.gen_range(1..20);
                Curve::from_indices(&space, &random_walk(&mut rng, &graph, start, steps)).unwrap()
            })
            .collect();
        bad += verify_upper_gradient(&space, &f, &rho, &curves, 0.0).unwrap().len();
    }
    out.check("edge gradient, 1000 walks over 20 graphs", bad == 0, format!("{bad} violations"));
    out
}

fn dyadic(space: &MetricSpace, ks: std::ops::RangeInclusive<i32>) -> Vec<f64> {
    let d = space.diameter();
    ks.map(|k| d / 2f64.powi(k)).collect()
}

/// `diameter / 2^k`, `k >= 2`, down to four sampling steps.
fn doubling_radii(space: &MetricSpace, step: f64) -> Vec<f64> {
    let d = space.diameter();
    (2..).map(|k| d / 2f64.powi(k)).take_while(|&r| r >= 4.0 * step).collect()
}

fn path_poincare(n: usize) -> f64 {
    let graph = WeightedGraph::path(n, 1.0 / (n - 1) as f64);
    let space = MetricSpace::Graph(graph.clone());
    let tests = default_test_functions(&space, 0, 20).unwrap();
    let centers: Vec<PointId> = space.points().collect();
    let radii = dyadic(&space, 2..=5);
    poincare_constant(&space, &graph, &Measure::counting(n), 1.0, 1.0, &tests, &centers, &radii)
        .unwrap()
        .estimate
}

fn doubling_poincare() -> Outcome {
    let mut out = Outcome::default();
    let line = unit_interval(999);
    let centers: Vec<PointId> = line.points().collect();
    let d = doubling_constant(&line, &Measure::counting(1000), &centers, &doubling_radii(&line, 1.0 / 999.0)).unwrap();
    out.check("doubling on 1000 points of [0, 1]", d.estimate <= DOUBLING_LINE_MAX, format!("{:?}", d.estimate));

    let side = 50;
    let pts = (0..side * side)
        .map(|i| FormulaPoint::Planar([(i % side) as f64 / (side - 1) as f64, (i / side) as f64 / (side - 1) as f64]))
        .collect();
    let grid = MetricSpace::Formula(FormulaSample::new(FormulaSpace::Plane, pts).unwrap());
    let centers: Vec<PointId> = grid.points().collect();
    let d = doubling_constant(&grid, &Measure::counting(side * side), &centers, &doubling_radii(&grid, 1.0 / (side - 1) as f64)).unwrap();
    out.check("doubling on the 50 x 50 grid", within(d.estimate, DOUBLING_GRID_BAND), format!("{:?}", d.estimate));

    let coarse = path_poincare(101);
    let fine = path_poincare(201);
    out.check("Poincare on the 101-vertex path", coarse <= POINCARE_PATH_MAX, format!("{coarse:?}"));
    out.check("Poincare on the 201-vertex path", fine <= POINCARE_PATH_MAX, format!("{fine:?}"));
    out.check(
        "refinement 101 -> 201",
        (fine / coarse - 1.0).abs() <= POINCARE_REFINEMENT,
        format!("ratio {:?}", fine / coarse),
    );

    let c = build_slit_plane(&[1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0], 64).unwrap();
    let graph = epsilon_graph(&c.space, 0.6).unwrap();
    let sample = c.sample();
    let near_slit: Vec<PointId> = c
        .space
        .points()
        .filter(|&p| {
            let [x, y] = sample.points()[p.0].planar().unwrap();
            x > 1.0 && y.abs() < 1.2
        })
        .collect();
    let mu = Measure::counting(c.space.len());
    let radii = [1.2, 1.5];
    let arg = TestFunction { name: "arg".into(), values: field(&c, "arg").clone() };
    let upper = ScalarField::from_fn(&c.space, |p| {
        if sample.points()[p.0].planar().unwrap()[1] > 0.0 {
            1.0
        } else {
            0.0
        }
    })
    .unwrap();
    let upper = TestFunction { name: "upper half".into(), values: upper };
    let e = poincare_constant(&c.space, &graph, &mu, 1.0, 1.0, &[arg], &near_slit, &radii).unwrap();
    out.check(
        "slit plane, f = arg: finite estimate",
        !e.has_failure() && e.estimate.is_finite() && e.estimate > 0.0,
        format!("{:?}", e.estimate),
    );
    let e = poincare_constant(&c.space, &graph, &mu, 1.0, 1.0, &[upper], &near_slit, &radii).unwrap();
    out.check("slit plane, indicator: failure witness", e.has_failure(), format!("{} witnesses", e.failure_witnesses));
    out
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("halfline corpus", halfline),
        ("cusp corpus", cusp),
        ("comb corpus", comb),
        ("modulus against oracles", modulus_oracles),
        ("modulus properties", modulus_properties),
        ("Hajlasz closed form", hajlasz),
        ("norm chain", norm_chain),
        ("upper gradients", upper_gradients),
        ("doubling and Poincare", doubling_poincare),
    ];
    let verbose = std::env::var_os("ACCEPTANCE_VERBOSE").is_some();
    let mut failed = 0;
    let mut deterministic = true;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let first = run();
        let second = run();
        deterministic &= first.report == second.report;
        let ok = first.failures.is_empty();
        println!("{} {:>2} {name}", if ok { "PASS" } else { "FAIL" }, i + 1);
        for f in &first.failures {
            println!("        {f}");
        }
        if verbose {
            for line in first.report.lines() {
                println!("        {line}");
            }
        }
        failed += usize::from(!ok);
    }
    println!("{} 10 determinism", if deterministic { "PASS" } else { "FAIL" });
    failed += usize::from(!deterministic);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
