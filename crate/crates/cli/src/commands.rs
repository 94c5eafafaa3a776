use std::path::Path;

use metricgeo::corpus::{self, CorpusSpace};
use metricgeo::curves::{quasi_convexity_constant, quasi_length_constant};
use metricgeo::lipschitz::{classify_membership, lip_field, sup_lip};
use metricgeo::metric::json::SpaceDoc;
use metricgeo::metric::{epsilon_graph, verify_metric_axioms, Measure, MetricSpace, PointId, WeightedGraph};
use metricgeo::modulus::{modulus_p, Exponent, ModulusInstance};
use metricgeo::sobolev::{
    default_test_functions, doubling_constant, minimal_edge_gradient, minimal_hajlasz_gradient_inf,
    minimal_hajlasz_gradient_p, newtonian_seminorm_by_component, norm_chain_report, poincare_constant,
    verify_upper_gradient, CHAIN_SLACK,
};

use crate::input::{self, InputError, LoadedSpace, Result};
use crate::report::{Cell, Report, Table};
use crate::{Cli, Command, CorpusArgs, SobolevCommand};

pub fn run(cli: &Cli) -> Result<Report> {
    let seed = cli.common.seed;
    match &cli.command {
        Command::VerifyMetric { space, tol } => verify_metric(&input::load_space(&space.space)?, *tol, seed),
        Command::Lip { field, schedule } => {
            let loaded = input::load_space(&field.space.space)?;
            lip(&loaded, &field.field, schedule.as_deref(), seed)
        }
        Command::Classify {
            field,
            schedule,
            threshold,
        } => {
            let loaded = input::load_space(&field.space.space)?;
            let f = input::load_field(&loaded, &field.field)?;
            let schedule = input::schedule(schedule.as_deref(), &loaded.space)?;
            let membership = classify_membership(&loaded.space, &f, &schedule, *threshold)?;
            let mut report = Report::new("classify", seed);
            report.set("field", &field.field);
            report.set("schedule", schedule.radii());
            report.merge(membership);
            Ok(report)
        }
        Command::Chains {
            space,
            pairs,
            eps,
            resolution,
        } => chains(&input::load_space(&space.space)?, pairs.as_deref(), eps.as_deref(), *resolution, seed),
        Command::Modulus { instance, p, tol } => modulus(instance, p.as_deref(), *tol, seed),
        Command::Sobolev(cmd) => sobolev(cmd, seed),
        Command::Corpus(args) => corpus_command(args, seed),
    }
}

fn resolution(space: &MetricSpace) -> Result<f64> {
    space
        .resolution()
        .ok_or_else(|| InputError::Other("the space has no two points at positive distance".into()))
}

/// The graph itself, or the epsilon-graph of a non-graph space (default
/// step bound 1.5 times the sampling resolution).
fn walk_graph(space: &MetricSpace, eps: Option<f64>) -> Result<(WeightedGraph, Option<f64>)> {
    if let MetricSpace::Graph(g) = space {
        return Ok((g.clone(), None));
    }
    let eps = match eps {
        Some(e) => e,
        None => 1.5 * resolution(space)?,
    };
    Ok((epsilon_graph(space, eps)?, Some(eps)))
}

fn verify_metric(loaded: &LoadedSpace, tol: f64, seed: u64) -> Result<Report> {
    let axioms = verify_metric_axioms(&loaded.space, tol)?;
    let mut report = Report::new("verify-metric", seed);
    report.failed = !axioms.passed();
    report.set("passed", axioms.passed());
    report.table = Some(Table {
        header: vec!["x", "y", "via", "defect"],
        rows: axioms
            .violations
            .iter()
            .map(|v| vec![v.x.0.into(), v.y.0.into(), v.via.0.into(), v.defect.into()])
            .collect(),
    });
    report.merge(axioms);
    Ok(report)
}

fn lip(loaded: &LoadedSpace, field: &str, schedule: Option<&str>, seed: u64) -> Result<Report> {
    let f = input::load_field(loaded, field)?;
    let schedule = input::schedule(schedule, &loaded.space)?;
    let estimates = lip_field(&loaded.space, &f, &schedule)?;
    let (sup, at) = sup_lip(&estimates);
    let mut report = Report::new("lip", seed);
    report.set("field", field);
    report.set("schedule", schedule.radii());
    report.set("sup_lip", sup);
    report.set("sup_lip_point", at);
    report.set("d_infty_norm", f.sup_norm().max(sup));
    let mut rows = Vec::new();
    for e in &estimates {
        for s in &e.scales {
            rows.push(vec![
                e.point.0.into(),
                s.r.into(),
                s.d_r.into(),
                s.s_r.into(),
                e.value.into(),
                e.converged.into(),
                e.isolated_at_finest.into(),
            ]);
        }
    }
    report.table = Some(Table {
        header: vec!["point", "r", "D_r", "S_r", "value", "converged", "isolated"],
        rows,
    });
    report.set("estimates", estimates);
    Ok(report)
}

fn chains(
    loaded: &LoadedSpace,
    pairs: Option<&str>,
    eps: Option<&str>,
    walk_resolution: Option<f64>,
    seed: u64,
) -> Result<Report> {
    let space = &loaded.space;
    let pairs = input::pairs(pairs, space)?;
    let eps_list = match eps {
        Some(spec) => input::float_list("--eps", spec)?,
        None => {
            let r = resolution(space)?;
            vec![4.0 * r, 2.0 * r]
        }
    };
    let lengths = quasi_length_constant(space, &pairs, &eps_list)?;
    let walk_resolution = match (space, walk_resolution) {
        (MetricSpace::Graph(_), _) => None,
        (_, Some(r)) => Some(r),
        (_, None) => Some(1.5 * resolution(space)?),
    };
    let convexity = quasi_convexity_constant(space, &pairs, walk_resolution)?;
    let mut report = Report::new("chains", seed);
    report.table = Some(Table {
        header: vec!["x", "y", "epsilon", "ell", "d", "ratio"],
        rows: lengths
            .rows
            .iter()
            .map(|r| vec![r.x.0.into(), r.y.0.into(), r.epsilon.into(), r.ell.into(), r.d.into(), r.ratio.into()])
            .collect(),
    });
    report.set("quasi_length", lengths);
    report.set("quasi_convexity", convexity);
    Ok(report)
}

fn modulus(path: &Path, p: Option<&str>, tol: Option<f64>, seed: u64) -> Result<Report> {
    let text = input::read(path)?;
    let mut instance = ModulusInstance::parse(&text).map_err(|source| InputError::Schema {
        path: path.display().to_string(),
        source,
    })?;
    if let Some(p) = p {
        instance.p = input::exponent(p)?;
    }
    if let Some(tol) = tol {
        if !(tol > 0.0) {
            return Err(InputError::Flag {
                flag: "--tol",
                message: format!("{tol} must be positive"),
            });
        }
        instance.tol = tol;
    }
    let result = modulus_p(&instance.graph, &instance.sigma, &instance.family, instance.p, instance.tol)?;
    let mut report = Report::new("modulus", seed);
    report.set("tol", instance.tol);
    report.set("edges", instance.graph.edges().len());
    report.table = Some(Table {
        header: vec!["edge", "u", "v", "length", "rho"],
        rows: instance
            .graph
            .edges()
            .iter()
            .zip(&result.rho)
            .enumerate()
            .map(|(i, (e, r))| vec![i.into(), e.u.into(), e.v.into(), e.len.into(), (*r).into()])
            .collect(),
    });
    report.merge(result);
    Ok(report)
}

fn default_radii(space: &MetricSpace, spec: Option<&str>, from: i32, to: i32) -> Result<Vec<f64>> {
    match spec {
        Some(s) => input::float_list("--radii", s),
        None => {
            let diameter = space.diameter();
            Ok((from..=to).map(|k| diameter * 0.5f64.powi(k)).collect())
        }
    }
}

fn centers(space: &MetricSpace, spec: Option<&str>) -> Result<Vec<PointId>> {
    match spec {
        Some(s) => input::index_list("--centers", s, space),
        None => Ok(space.points().collect()),
    }
}

fn sobolev(cmd: &SobolevCommand, seed: u64) -> Result<Report> {
    match cmd {
        SobolevCommand::Hajlasz { field, p } => {
            let loaded = input::load_space(&field.space.space)?;
            let f = input::load_field(&loaded, &field.field)?;
            let p = input::exponent(p)?;
            let g = match p {
                Exponent::Infinity => minimal_hajlasz_gradient_inf(&loaded.space, &f)?,
                _ => minimal_hajlasz_gradient_p(&loaded.space, &f, &Measure::counting(loaded.space.len()), p)?,
            };
            let mut report = Report::new("sobolev hajlasz", seed);
            report.set("field", &field.field);
            report.set("measure", "counting");
            report.table = Some(Table {
                header: vec!["point", "g"],
                rows: g.g.iter().enumerate().map(|(i, v)| vec![i.into(), (*v).into()]).collect(),
            });
            report.merge(g);
            Ok(report)
        }
        SobolevCommand::UpperGradient {
            field,
            curves,
            gradient,
            tol,
        } => {
            let loaded = input::load_space(&field.space.space)?;
            let f = input::load_field(&loaded, &field.field)?;
            let curves = input::curves(curves, &loaded.space)?;
            let g = match (gradient, &loaded.space) {
                (Some(path), _) => input::density(path)?,
                (None, MetricSpace::Graph(graph)) => minimal_edge_gradient(graph, &f)?,
                (None, _) => {
                    return Err(InputError::Flag {
                        flag: "--gradient",
                        message: "required for non-graph spaces".into(),
                    })
                }
            };
            let violations = verify_upper_gradient(&loaded.space, &f, &g, &curves, *tol)?;
            let mut report = Report::new("sobolev upper-gradient", seed);
            report.failed = !violations.is_empty();
            report.set("field", &field.field);
            report.set("curves", curves.len());
            report.set("tol", tol);
            report.set("gradient_location", g.location());
            report.table = Some(Table {
                header: vec!["curve", "delta_f", "integral"],
                rows: violations
                    .iter()
                    .map(|v| vec![v.curve.into(), v.delta_f.into(), v.integral.into()])
                    .collect(),
            });
            report.set("violations", violations);
            Ok(report)
        }
        SobolevCommand::Newtonian { field, eps } => {
            let loaded = input::load_space(&field.space.space)?;
            let f = input::load_field(&loaded, &field.field)?;
            let (graph, eps) = walk_graph(&loaded.space, *eps)?;
            let components = newtonian_seminorm_by_component(&graph, &f)?;
            let connected = components.len() == 1;
            let mut report = Report::new("sobolev newtonian", seed);
            report.set("field", &field.field);
            report.set("eps", eps);
            report.set("connected", connected);
            report.set("value", connected.then(|| components[0].value));
            report.table = Some(Table {
                header: vec!["component", "vertices", "value"],
                rows: components
                    .iter()
                    .map(|c| vec![c.component.into(), c.vertices.into(), c.value.into()])
                    .collect(),
            });
            report.set("components", components);
            Ok(report)
        }
        SobolevCommand::Doubling { space, radii, centers: c } => {
            let loaded = input::load_space(&space.space)?;
            let s = &loaded.space;
            let radii = default_radii(s, radii.as_deref(), 2, 7)?;
            let centers = centers(s, c.as_deref())?;
            let doubling = doubling_constant(s, &Measure::counting(s.len()), &centers, &radii)?;
            let mut report = Report::new("sobolev doubling", seed);
            report.set("measure", "counting");
            report.table = Some(Table {
                header: vec!["center", "r", "inner", "outer", "ratio"],
                rows: doubling
                    .rows
                    .iter()
                    .map(|r| vec![r.center.0.into(), r.r.into(), r.inner.into(), r.outer.into(), r.ratio.into()])
                    .collect(),
            });
            report.merge(doubling);
            Ok(report)
        }
        SobolevCommand::Poincare {
            space,
            p,
            lambda,
            radii,
            centers: c,
            random,
            eps,
        } => {
            let loaded = input::load_space(&space.space)?;
            let s = &loaded.space;
            let (graph, eps) = walk_graph(s, *eps)?;
            let radii = default_radii(s, radii.as_deref(), 2, 5)?;
            let centers = centers(s, c.as_deref())?;
            let tests = default_test_functions(s, seed, *random)?;
            let estimate =
                poincare_constant(s, &graph, &Measure::counting(s.len()), *p, *lambda, &tests, &centers, &radii)?;
            let mut report = Report::new("sobolev poincare", seed);
            report.failed = estimate.has_failure();
            report.set("eps", eps);
            report.set("measure", "counting");
            report.table = Some(Table {
                header: vec!["function", "center", "r", "lhs", "rhs", "ratio", "status"],
                rows: estimate
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.function.into(),
                            r.center.0.into(),
                            r.r.into(),
                            r.lhs.into(),
                            r.rhs.into(),
                            r.ratio.map_or(Cell::from(""), Cell::from),
                            serde_json::to_value(r.status)
                                .ok()
                                .and_then(|v| v.as_str().map(String::from))
                                .unwrap_or_default()
                                .into(),
                        ]
                    })
                    .collect(),
            });
            report.merge(estimate);
            Ok(report)
        }
        SobolevCommand::Chain { field, schedule, eps } => {
            let loaded = input::load_space(&field.space.space)?;
            let f = input::load_field(&loaded, &field.field)?;
            let s = &loaded.space;
            let schedule = input::schedule(schedule.as_deref(), s)?;
            let eps = match (s, eps) {
                (_, Some(e)) => *e,
                (MetricSpace::Graph(g), None) => g.min_edge_len().unwrap_or(0.0),
                (_, None) => 1.5 * resolution(s)?,
            };
            let chain = norm_chain_report(s, &f, &schedule, eps, CHAIN_SLACK)?;
            let mut report = Report::new("sobolev chain", seed);
            report.failed = !chain.chain_holds;
            report.set("field", &field.field);
            report.set("schedule", schedule.radii());
            report.merge(chain);
            Ok(report)
        }
    }
}

fn cusp_range(t0: f64, samples: usize) -> Vec<f64> {
    let count = (((1.0 - t0) * samples as f64).round() as usize).max(1);
    (0..=count).map(|i| t0 + (1.0 - t0) * i as f64 / count as f64).collect()
}

pub fn build_corpus(args: &CorpusArgs, name: &str) -> Result<CorpusSpace> {
    let n = args.n_max;
    let samples = args.samples;
    Ok(match name {
        "halfline" => corpus::build_halfline(n.unwrap_or(10), samples.unwrap_or(50))?,
        "cusp" => corpus::build_cusp(&corpus::cusp_ladder(args.t_min.unwrap_or(0.01))?)?,
        "cusp_intrinsic" => {
            corpus::build_cusp_intrinsic(&cusp_range(args.t_min.unwrap_or(0.2), samples.unwrap_or(1000)))?
        }
        "cusp_segment" => corpus::build_cusp_segment(
            &cusp_range(args.t_min.unwrap_or(0.2), samples.unwrap_or(100)),
            n.unwrap_or(20),
        )?,
        "comb" => corpus::build_comb(n.unwrap_or(5), samples.unwrap_or(100))?,
        "ball_sequence" => corpus::build_ball_sequence(n.unwrap_or(6), samples.unwrap_or(30))?,
        "slit_plane" => {
            let radii: Vec<f64> = (0..n.unwrap_or(7)).map(|k| 1.0 + 0.5 * k as f64).collect();
            corpus::build_slit_plane(&radii, samples.unwrap_or(64))?
        }
        other => {
            return Err(InputError::Flag {
                flag: "--name",
                message: format!("unknown corpus space '{other}' (available: {})", corpus::NAMES.join(", ")),
            })
        }
    })
}

fn corpus_command(args: &CorpusArgs, seed: u64) -> Result<Report> {
    let mut report = Report::new("corpus", seed);
    let Some(name) = &args.name else {
        report.set("spaces", corpus::NAMES);
        report.table = Some(Table {
            header: vec!["name"],
            rows: corpus::NAMES.iter().map(|n| vec![Cell::from(*n)]).collect(),
        });
        return Ok(report);
    };
    let c = build_corpus(args, name)?;
    if let Some(path) = &args.emit {
        let mut doc = SpaceDoc::from_space(&c.space);
        doc.fields = c.fields.iter().map(|(k, v)| (k.clone(), v.values().to_vec())).collect();
        let text = serde_json::to_string(&doc).expect("space documents serialize");
        std::fs::write(path, text).map_err(|source| InputError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    let checks = c.verify_facts()?;
    report.failed = checks.iter().any(|c| !c.passed);
    report.set("name", &c.name);
    report.set("points", c.space.len());
    report.set("fields", c.fields.keys().collect::<Vec<_>>());
    report.set("schedule", c.schedule.radii());
    report.table = Some(Table {
        header: vec!["description", "expected", "computed", "tolerance", "passed"],
        rows: checks
            .iter()
            .map(|f| {
                vec![
                    f.description.as_str().into(),
                    f.expected.into(),
                    f.computed.into(),
                    f.tolerance.into(),
                    f.passed.into(),
                ]
            })
            .collect(),
    });
    let facts: Vec<_> = c
        .facts
        .iter()
        .zip(&checks)
        .map(|(fact, check)| serde_json::json!({ "fact": fact, "check": check }))
        .collect();
    report.set("facts", facts);
    Ok(report)
}
