//! Sampled example spaces with their distinguished functions and the
//! closed-form values those functions are known to take.
//!
//! Every builder returns a [`CorpusSpace`]: a [`FormulaSample`] carrying the
//! exact distance rule, named fields, a list of [`Fact`]s and a scale
//! schedule under which the sampled Lip estimates resolve the facts.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lipschitz::{difference_quotient, lip_estimate, lip_field, sup_lip, ScaleSchedule};
use crate::metric::{
    ball_sequence_disc, cusp_point, verify_metric_axioms, FormulaPoint, FormulaSample, FormulaSpace, MetricSpace,
    PointId, ScalarField, DEFAULT_METRIC_TOL, SLIT_HALF_WIDTH,
};

pub const NAMES: [&str; 7] = [
    "halfline",
    "cusp",
    "cusp_intrinsic",
    "cusp_segment",
    "comb",
    "ball_sequence",
    "slit_plane",
];

/// Largest sample on which the metric axioms are checked in full; bigger
/// samples are thinned to about this many points first.
const AXIOM_SAMPLE: usize = 300;

/// How a fact is recomputed from the sampled space.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum FactRule {
    Distance {
        x: PointId,
        y: PointId,
    },
    FieldValue {
        field: String,
        x: PointId,
    },
    /// `|f(x) - f(y)|`.
    FieldDifference {
        field: String,
        x: PointId,
        y: PointId,
    },
    /// `|f(x) - f(y)| / d(x, y)`.
    Quotient {
        field: String,
        x: PointId,
        y: PointId,
    },
    /// `sup |f - g|`, or `sup |f|` without `minus`.
    SupNorm {
        field: String,
        minus: Option<String>,
    },
    /// Largest finest-scale Lip estimate of `f - g` (or `f`).
    SupLip {
        field: String,
        minus: Option<String>,
        radii: Vec<f64>,
    },
    LipAt {
        field: String,
        x: PointId,
        radii: Vec<f64>,
    },
    /// `1` when the (thinned) sample satisfies the metric axioms.
    MetricAxioms,
    /// Largest ratio `d_target(x, y) / d_source(x, y)` over
    /// `0 < d_source(x, y) <= radius`: the sampled `sup Lip` of the identity
    /// map between two formula spaces on the same parameters.
    IdentityLip {
        source: String,
        target: String,
        radius: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Fact {
    pub description: String,
    pub value: f64,
    pub tolerance: f64,
    #[serde(flatten)]
    pub rule: FactRule,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactCheck {
    pub description: String,
    pub expected: f64,
    pub computed: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct CorpusSpace {
    pub name: String,
    pub space: MetricSpace,
    pub fields: BTreeMap<String, ScalarField>,
    pub facts: Vec<Fact>,
    /// Scales at which the sampled Lip estimates are meaningful.
    pub schedule: ScaleSchedule,
}

impl CorpusSpace {
    pub fn sample(&self) -> &FormulaSample {
        self.space.as_formula().expect("corpus spaces are formula samples")
    }

    pub fn field(&self, name: &str) -> Result<&ScalarField> {
        self.fields.get(name).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "corpus space '{}' has no field '{name}' (available: {})",
                self.name,
                self.fields.keys().cloned().collect::<Vec<_>>().join(", ")
            ))
        })
    }

    /// Index of the sample point with the given parameter.
    pub fn find(&self, p: FormulaPoint) -> Option<PointId> {
        self.sample().points().iter().position(|&q| q == p).map(PointId)
    }

    fn difference(&self, field: &str, minus: &Option<String>) -> Result<ScalarField> {
        let f = self.field(field)?;
        Ok(match minus {
            Some(g) => f.sub(self.field(g)?),
            None => f.clone(),
        })
    }

    pub fn evaluate(&self, rule: &FactRule) -> Result<f64> {
        let space = &self.space;
        match rule {
            FactRule::Distance { x, y } => space.distance(*x, *y),
            FactRule::FieldValue { field, x } => {
                space.check(*x)?;
                Ok(self.field(field)?.get(*x))
            }
            FactRule::FieldDifference { field, x, y } => {
                space.check(*x)?;
                space.check(*y)?;
                let f = self.field(field)?;
                Ok((f.get(*x) - f.get(*y)).abs())
            }
            FactRule::Quotient { field, x, y } => difference_quotient(space, self.field(field)?, *x, *y),
            FactRule::SupNorm { field, minus } => Ok(self.difference(field, minus)?.sup_norm()),
            FactRule::SupLip { field, minus, radii } => {
                let f = self.difference(field, minus)?;
                let schedule = ScaleSchedule::new(radii.clone())?;
                Ok(sup_lip(&lip_field(space, &f, &schedule)?).0)
            }
            FactRule::LipAt { field, x, radii } => {
                let schedule = ScaleSchedule::new(radii.clone())?;
                Ok(lip_estimate(space, self.field(field)?, *x, &schedule)?.value)
            }
            FactRule::MetricAxioms => {
                let sample = self.sample();
                let stride = sample.len().div_ceil(AXIOM_SAMPLE).max(1);
                let points: Vec<_> = sample.points().iter().step_by(stride).copied().collect();
                let thinned = MetricSpace::Formula(FormulaSample::new(sample.space().clone(), points)?);
                let report = verify_metric_axioms(&thinned, DEFAULT_METRIC_TOL)?;
                Ok(if report.passed() { 1.0 } else { 0.0 })
            }
            FactRule::IdentityLip { source, target, radius } => {
                let sample = self.sample();
                let on = |name: &str| -> Result<FormulaSample> {
                    let formula = FormulaSpace::from_name(name, &sample.space().params())?;
                    FormulaSample::new(formula, sample.points().to_vec())
                };
                identity_lip(&MetricSpace::Formula(on(source)?), &on(target)?, *radius)
            }
        }
    }

    pub fn verify_facts(&self) -> Result<Vec<FactCheck>> {
        self.facts
            .iter()
            .map(|fact| {
                let computed = self.evaluate(&fact.rule)?;
                Ok(FactCheck {
                    description: fact.description.clone(),
                    expected: fact.value,
                    computed,
                    tolerance: fact.tolerance,
                    passed: (computed - fact.value).abs() <= fact.tolerance,
                })
            })
            .collect()
    }
}

/// Largest `d_image(x, y) / d(x, y)` over `0 < d(x, y) <= radius`.
pub fn identity_lip(space: &MetricSpace, image: &FormulaSample, radius: f64) -> Result<f64> {
    if image.len() != space.len() {
        return Err(Error::InvalidArgument("image sample has a different size".into()));
    }
    let hood = space.neighborhoods(radius);
    let mut best = 0.0f64;
    for x in space.points() {
        for (y, d) in hood.of(x) {
            best = best.max(image.distance(x.0, y.0) / d);
        }
    }
    Ok(best)
}

fn radii_up_from(finest: f64, top: f64, max_len: usize) -> Vec<f64> {
    let mut radii = vec![finest];
    while radii.len() < max_len && (radii.len() < 2 || radii[radii.len() - 1] < top) {
        let next = radii[radii.len() - 1] * 2.0;
        radii.push(next);
    }
    radii.reverse();
    radii
}

fn fact(description: impl Into<String>, value: f64, tolerance: f64, rule: FactRule) -> Fact {
    Fact {
        description: description.into(),
        value,
        tolerance,
        rule,
    }
}

fn field_of(values: Vec<f64>) -> ScalarField {
    ScalarField::new(values).expect("corpus fields are finite")
}

fn positive_count(what: &str, v: usize, min: usize) -> Result<()> {
    if v < min {
        return Err(Error::InvalidArgument(format!("{what} must be at least {min}, got {v}")));
    }
    Ok(())
}

/// `[0, n_max]` with the glued interval metric, sampled at `i / samples`.
/// The field `g` is the distance to the nearest even integer, so it rises
/// and falls with slope one across consecutive intervals.
pub fn build_halfline(n_max: usize, samples_per_interval: usize) -> Result<CorpusSpace> {
    positive_count("n_max", n_max, 1)?;
    positive_count("samples per interval", samples_per_interval, 2)?;
    let s = samples_per_interval;
    let params: Vec<f64> = (0..=n_max * s).map(|i| i as f64 / s as f64).collect();
    let g: Vec<f64> = params.iter().map(|&x| (x - 2.0 * (x / 2.0).round()).abs()).collect();
    let sample = FormulaSample::new(
        FormulaSpace::HalfLine { n_max },
        params.iter().map(|&x| FormulaPoint::Scalar(x)).collect(),
    )?;
    let at = |n: usize| PointId(n * s);

    let mut facts = Vec::new();
    for n in 1..=n_max {
        let nf = n as f64;
        facts.push(fact(
            format!("d({}, {n}) = (2n - 1)/n^2", n - 1),
            (2.0 * nf - 1.0) / (nf * nf),
            1e-12,
            FactRule::Distance { x: at(n - 1), y: at(n) },
        ));
    }
    if n_max >= 2 {
        facts.push(fact("d(0, 2) = 1 + 3/4", 1.75, 1e-12, FactRule::Distance { x: at(0), y: at(2) }));
    }
    for n in 0..=n_max {
        facts.push(fact(
            format!("g({n})"),
            (n % 2) as f64,
            0.0,
            FactRule::FieldValue { field: "g".into(), x: at(n) },
        ));
    }
    for n in 1..=n_max {
        let nf = n as f64;
        facts.push(fact(
            format!("|g({n}) - g({})| / d = n^2/(2n - 1)", n - 1),
            nf * nf / (2.0 * nf - 1.0),
            1e-12,
            FactRule::Quotient { field: "g".into(), x: at(n - 1), y: at(n) },
        ));
    }

    // below 1/n_max every ball is a Euclidean ball
    let step = 1.0 / s as f64;
    let finest = (0.9 / n_max as f64).max(1.5 * step);
    let radii = radii_up_from(finest, 0.5, 12);
    if 0.9 / n_max as f64 > step {
        facts.push(fact(
            "sup Lip g = 1",
            1.0,
            0.02,
            FactRule::SupLip { field: "g".into(), minus: None, radii: radii.clone() },
        ));
        // interior point of the last interval
        let x = PointId(n_max * s - s / 2);
        facts.push(fact(
            format!("Lip g({}) = 1", params[x.0]),
            1.0,
            0.02,
            FactRule::LipAt { field: "g".into(), x, radii: radii.clone() },
        ));
    }

    Ok(CorpusSpace {
        name: "halfline".into(),
        space: MetricSpace::Formula(sample),
        fields: BTreeMap::from([("g".to_string(), field_of(g))]),
        facts,
        schedule: ScaleSchedule::new(radii)?,
    })
}

/// Positive cusp parameters from `t_min` to `1` with ratio `1 + t_min / 2`,
/// together with every power of ten in `[t_min, 1)`.
///
/// Consecutive points near `t_min` are then closer than the mirror points
/// across the cusp, which is what the finest scale of [`build_cusp`]
/// relies on.
pub fn cusp_ladder(t_min: f64) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_min < 1.0) {
        return Err(Error::InvalidArgument(format!("t_min {t_min} must lie in (0, 1)")));
    }
    let mut decades = Vec::new();
    let mut d = 0.1;
    let mut k = 1;
    while d >= t_min * (1.0 - 1e-12) {
        decades.push(d);
        k += 1;
        d = 10f64.powi(-k);
    }
    let ratio = 1.0 + t_min / 2.0;
    let mut ts = Vec::new();
    let mut t = t_min;
    while t < 1.0 {
        if decades.iter().all(|&d| (t - d).abs() > 1e-6 * d) {
            ts.push(t);
        }
        t *= ratio;
    }
    ts.push(1.0);
    ts.extend(decades);
    ts.sort_by(f64::total_cmp);
    Ok(ts)
}

fn mirrored(t_samples: &[f64], with_origin: bool) -> Result<Vec<f64>> {
    if t_samples.is_empty() {
        return Err(Error::InvalidArgument("need at least one cusp parameter".into()));
    }
    let mut ts: Vec<f64> = Vec::new();
    for &t in t_samples {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!("cusp parameter {t} must lie in (0, 1]")));
        }
        ts.push(t);
        ts.push(-t);
    }
    if with_origin {
        ts.push(0.0);
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    Ok(ts)
}

/// The cusp `y^3 = x^2` sampled at `(t^3, t^2)` for `t = 0` and `t = ±s`,
/// `s` in `t_samples`. The field `g` is `y` on the right branch and `-y`
/// on the left one.
pub fn build_cusp(t_samples: &[f64]) -> Result<CorpusSpace> {
    let ts = mirrored(t_samples, true)?;
    let g: Vec<f64> = ts.iter().map(|&t| t.signum() * t * t).collect();
    let sample = FormulaSample::new(FormulaSpace::Cusp, ts.iter().map(|&t| FormulaPoint::Scalar(t)).collect())?;
    let index = |t: f64| PointId(ts.iter().position(|&s| s == t).expect("sampled parameter"));
    let origin = index(0.0);
    let t_min = t_samples.iter().copied().fold(f64::INFINITY, f64::min);

    let mut facts = vec![fact("g(0, 0) = 0", 0.0, 0.0, FactRule::FieldValue { field: "g".into(), x: origin })];
    let mut decade = 0.1;
    let mut k = 1;
    while decade >= t_min * (1.0 - 1e-12) {
        if let (Some(a), Some(b)) = (
            ts.iter().position(|&s| s == decade),
            ts.iter().position(|&s| s == -decade),
        ) {
            let (a, b) = (PointId(a), PointId(b));
            let t = decade;
            facts.push(fact(format!("d(A_t, B_t) = 2t^3, t = {t:e}"), 2.0 * t.powi(3), 1e-15, FactRule::Distance {
                x: a,
                y: b,
            }));
            facts.push(fact(
                format!("|g(A_t) - g(B_t)| = 2t^2, t = {t:e}"),
                2.0 * t * t,
                1e-15,
                FactRule::FieldDifference { field: "g".into(), x: a, y: b },
            ));
            facts.push(fact(
                format!("quotient at (A_t, B_t) = 1/t, t = {t:e}"),
                1.0 / t,
                1e-9,
                FactRule::Quotient { field: "g".into(), x: a, y: b },
            ));
        }
        k += 1;
        decade = 10f64.powi(-k);
    }
    // the ball at the origin reaching just past A_{t_min}
    let reach = 1.5 * t_min * t_min;
    facts.push(fact(
        "Lip g(0, 0) = 1",
        1.0,
        0.02,
        FactRule::LipAt { field: "g".into(), x: origin, radii: vec![2.0 * reach, reach] },
    ));

    // finer than the gap 2 t_min^3 between mirror points
    let finest = 1.5 * t_min.powi(3);
    Ok(CorpusSpace {
        name: "cusp".into(),
        space: MetricSpace::Formula(sample),
        fields: BTreeMap::from([("g".to_string(), field_of(g))]),
        facts,
        schedule: ScaleSchedule::new(radii_up_from(finest, 0.5, 8))?,
    })
}

fn identity_fact(source: &str, target: &str, radius: f64) -> Fact {
    fact(format!("sup Lip of the identity {source} -> {target} = 1"), 1.0, 1e-9, FactRule::IdentityLip {
        source: source.into(),
        target: target.into(),
        radius,
    })
}

/// Largest gap between consecutive cusp points with the given sorted
/// parameters.
fn cusp_scale(ts: &[f64]) -> f64 {
    ts.windows(2)
        .map(|w| (cusp_point(w[1])[0] - cusp_point(w[0])[0]).hypot(cusp_point(w[1])[1] - cusp_point(w[0])[1]))
        .fold(0.0, f64::max)
}

/// `[-1, 1]` carrying the cusp metric on each half, with distances between
/// the halves routed through the origin. The identity to and from the
/// Euclidean cusp is an infinitesimal isometry; the facts compare the two
/// metrics on balls small enough to never hold a pair of mirror points.
pub fn build_cusp_intrinsic(t_samples: &[f64]) -> Result<CorpusSpace> {
    let ts = mirrored(t_samples, true)?;
    let sample = FormulaSample::new(
        FormulaSpace::CuspIntrinsic,
        ts.iter().map(|&t| FormulaPoint::Scalar(t)).collect(),
    )?;
    let t: Vec<f64> = ts.clone();
    let positive: Vec<f64> = ts.iter().copied().filter(|&t| t > 0.0).collect();
    // mirror points A_t, B_t sit 2 t^3 apart and must stay out of every ball
    let t_min = positive[0];
    let radius = (1.01 * cusp_scale(&positive)).min(1.98 * t_min.powi(3));
    let facts = vec![
        fact("metric axioms hold", 1.0, 0.0, FactRule::MetricAxioms),
        identity_fact("cusp_intrinsic", "cusp", radius),
        identity_fact("cusp", "cusp_intrinsic", radius),
    ];
    Ok(CorpusSpace {
        name: "cusp_intrinsic".into(),
        space: MetricSpace::Formula(sample),
        fields: BTreeMap::from([("t".to_string(), field_of(t))]),
        facts,
        schedule: ScaleSchedule::new(vec![2.0 * radius, radius])?,
    })
}

/// The cusp with the segment `[1, 2) x {1}` attached at `(1, 1)`, sampled at
/// the cusp parameters `±t` (and `0`) plus `segment_samples` equally spaced
/// segment points.
pub fn build_cusp_segment(t_samples: &[f64], segment_samples: usize) -> Result<CorpusSpace> {
    positive_count("segment samples", segment_samples, 1)?;
    let ts = mirrored(t_samples, true)?;
    let mut points: Vec<[f64; 2]> = ts.iter().map(|&t| cusp_point(t)).collect();
    for j in 1..=segment_samples {
        let x = 1.0 + j as f64 / (segment_samples + 1) as f64;
        points.push([x, 1.0]);
    }
    let x_coord: Vec<f64> = points.iter().map(|p| p[0]).collect();
    let sample = FormulaSample::new(
        FormulaSpace::CuspSegment,
        points.iter().map(|&p| FormulaPoint::Planar(p)).collect(),
    )?;
    let space = MetricSpace::Formula(sample);
    let schedule = ScaleSchedule::default_for(&space)?;
    Ok(CorpusSpace {
        name: "cusp_segment".into(),
        space,
        fields: BTreeMap::from([("x".to_string(), field_of(x_coord))]),
        facts: vec![fact("metric axioms hold", 1.0, 0.0, FactRule::MetricAxioms)],
        schedule,
    })
}

/// Pairs `(n, m)` for which the comb carries Cauchy-gap facts.
const COMB_PAIRS: [(usize, usize); 4] = [(2, 3), (3, 5), (5, 9), (10, 20)];

/// `f_n(1/k, y) = (k - y)/(k sqrt k)` on the arms `k <= n`, zero elsewhere.
fn comb_value(n: usize, [x, y]: [f64; 2]) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let k = (1.0 / x).round();
    if k >= 1.0 && k <= n as f64 && x == 1.0 / k {
        (k - y) / (k * k.sqrt())
    } else {
        0.0
    }
}

/// The comb: axis `{0} x [0, n_arms]`, arms `{1/k} x [0, k]` and the
/// hyperbola `y = 1/x` between the arm tops, sampled `samples` times per
/// unit length on the axis and the arms. The hyperbola is represented by
/// the arm tops and the midpoints between consecutive tops.
///
/// Fields `f_1 ... f_{n_arms}` and their pointwise limit `f`.
pub fn build_comb(n_arms: usize, samples: usize) -> Result<CorpusSpace> {
    positive_count("n_arms", n_arms, 1)?;
    positive_count("samples per unit length", samples, 1)?;
    let s = samples as f64;
    let mut points: Vec<[f64; 2]> = Vec::new();
    for j in 0..=n_arms * samples {
        points.push([0.0, j as f64 / s]);
    }
    let mut bottoms = Vec::with_capacity(n_arms);
    for k in 1..=n_arms {
        let x = 1.0 / k as f64;
        bottoms.push(PointId(points.len()));
        for j in 0..=k * samples {
            points.push([x, j as f64 / s]);
        }
    }
    for k in 1..n_arms {
        let x = 0.5 * (1.0 / k as f64 + 1.0 / (k + 1) as f64);
        points.push([x, 1.0 / x]);
    }
    let origin = PointId(0);

    let mut fields = BTreeMap::new();
    for n in 1..=n_arms {
        fields.insert(format!("f_{n}"), field_of(points.iter().map(|&p| comb_value(n, p)).collect()));
    }
    fields.insert("f".to_string(), field_of(points.iter().map(|&p| comb_value(n_arms, p)).collect()));

    // half the smallest gap between arms, which is also the smallest gap
    // between a hyperbola midpoint and an arm
    let half_gap = if n_arms >= 2 {
        0.5 / (n_arms * (n_arms - 1)) as f64
    } else {
        0.5
    };
    let finest = 0.9 * half_gap;
    let radii = vec![2.0 * finest, finest];
    let resolved = 1.0 / s < finest;

    let mut facts = Vec::new();
    for k in 1..=n_arms {
        let kf = k as f64;
        facts.push(fact(
            format!("f_{n_arms}(1/{k}, 0) = 1/sqrt({k})"),
            1.0 / kf.sqrt(),
            1e-15,
            FactRule::FieldValue { field: format!("f_{n_arms}"), x: bottoms[k - 1] },
        ));
        facts.push(fact(
            format!("|f(1/{k}, 0) - f(0, 0)| / d = sqrt({k})"),
            kf.sqrt(),
            1e-9,
            FactRule::Quotient { field: "f".into(), x: bottoms[k - 1], y: origin },
        ));
    }
    for (n, m) in COMB_PAIRS.into_iter().filter(|&(_, m)| m <= n_arms) {
        let next = (n + 1) as f64;
        facts.push(fact(
            format!("sup |f_{n} - f_{m}| = 1/sqrt({})", n + 1),
            1.0 / next.sqrt(),
            1e-9,
            FactRule::SupNorm { field: format!("f_{n}"), minus: Some(format!("f_{m}")) },
        ));
        if resolved {
            facts.push(fact(
                format!("sup Lip(f_{n} - f_{m}) = 1/({0} sqrt({0}))", n + 1),
                1.0 / (next * next.sqrt()),
                1e-9,
                FactRule::SupLip { field: format!("f_{n}"), minus: Some(format!("f_{m}")), radii: radii.clone() },
            ));
        }
    }

    Ok(CorpusSpace {
        name: "comb".into(),
        space: MetricSpace::Formula(FormulaSample::new(
            FormulaSpace::Comb { n_arms },
            points.iter().map(|&p| FormulaPoint::Planar(p)).collect(),
        )?),
        fields,
        facts,
        schedule: ScaleSchedule::new(radii)?,
    })
}

/// `count` disjoint open discs shrinking towards the origin, each sampled by
/// a sunflower pattern of `samples_per_ball` points. The field `parity` is
/// `1` on odd discs and `0` on even ones.
pub fn build_ball_sequence(count: usize, samples_per_ball: usize) -> Result<CorpusSpace> {
    positive_count("count", count, 1)?;
    positive_count("samples per ball", samples_per_ball, 1)?;
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut points = Vec::new();
    let mut parity = Vec::new();
    let mut firsts = Vec::new();
    for i in 1..=count {
        let (c, r) = ball_sequence_disc(i);
        firsts.push(PointId(points.len()));
        for j in 0..samples_per_ball {
            let rho = 0.9 * r * ((j as f64 + 0.5) / samples_per_ball as f64).sqrt();
            let a = j as f64 * golden;
            points.push([c[0] + rho * a.cos(), c[1] + rho * a.sin()]);
            parity.push((i % 2) as f64);
        }
    }
    // the gap between discs i and i + 1 is 0.3 * 2^-i
    let finest = 0.5 * 0.5f64.powi(count as i32);
    let radii = vec![2.0 * finest, finest];
    let mut facts = vec![fact("parity on B_1 = 1", 1.0, 0.0, FactRule::FieldValue {
        field: "parity".into(),
        x: firsts[0],
    })];
    if count >= 2 {
        facts.push(fact("parity on B_2 = 0", 0.0, 0.0, FactRule::FieldValue {
            field: "parity".into(),
            x: firsts[1],
        }));
    }
    facts.push(fact("Lip parity = 0 inside the discs", 0.0, 0.0, FactRule::SupLip {
        field: "parity".into(),
        minus: None,
        radii: radii.clone(),
    }));
    Ok(CorpusSpace {
        name: "ball_sequence".into(),
        space: MetricSpace::Formula(FormulaSample::new(
            FormulaSpace::BallSequence { count },
            points.iter().map(|&p| FormulaPoint::Planar(p)).collect(),
        )?),
        fields: BTreeMap::from([("parity".to_string(), field_of(parity))]),
        facts,
        schedule: ScaleSchedule::new(radii)?,
    })
}

/// The argument on `(0, 2 pi)`, continuous off the removed half-strip.
pub fn slit_arg([x, y]: [f64; 2]) -> f64 {
    let a = y.atan2(x);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Polar samples `rho * e^{2 pi i j / N}`, `j = 1 .. N - 1`, of the slit
/// plane, skipping those inside the removed strip. The field `arg` is the
/// argument in `(0, 2 pi)`.
pub fn build_slit_plane(radii: &[f64], angular_samples: usize) -> Result<CorpusSpace> {
    positive_count("angular samples", angular_samples, 4)?;
    if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidArgument("slit-plane radii must be positive".into()));
    }
    let mut rings: Vec<f64> = radii.to_vec();
    rings.sort_by(f64::total_cmp);
    rings.dedup();
    let n = angular_samples;
    let mut points = Vec::new();
    let mut negative_axis = Vec::new();
    for &rho in &rings {
        for j in 1..n {
            let p = if 2 * j == n {
                negative_axis.push((rho, PointId(points.len())));
                [-rho, 0.0]
            } else {
                let a = 2.0 * PI * j as f64 / n as f64;
                [rho * a.cos(), rho * a.sin()]
            };
            if p[0] >= 0.0 && p[1].abs() <= SLIT_HALF_WIDTH {
                continue;
            }
            points.push(p);
        }
    }
    let arg: Vec<f64> = points.iter().map(|&p| slit_arg(p)).collect();
    let chord = |rho: f64| 2.0 * rho * (PI / n as f64).sin();

    let mut facts = Vec::new();
    for &(rho, x) in &negative_axis {
        if rho == 1.0 {
            facts.push(fact("arg(-1) = pi", PI, 1e-15, FactRule::FieldValue { field: "arg".into(), x }));
        }
        facts.push(fact(format!("Lip arg(-{rho}) = 1/{rho}"), 1.0 / rho, 0.02 / rho, FactRule::LipAt {
            field: "arg".into(),
            x,
            radii: vec![2.4 * chord(rho), 1.2 * chord(rho)],
        }));
    }
    let finest = 1.2 * chord(rings[rings.len() - 1]);
    Ok(CorpusSpace {
        name: "slit_plane".into(),
        space: MetricSpace::Formula(FormulaSample::new(
            FormulaSpace::SlitPlane,
            points.iter().map(|&p| FormulaPoint::Planar(p)).collect(),
        )?),
        fields: BTreeMap::from([("arg".to_string(), field_of(arg))]),
        facts,
        schedule: ScaleSchedule::new(vec![2.0 * finest, finest])?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_facts(c: &CorpusSpace) {
        for check in c.verify_facts().unwrap() {
            assert!(check.passed, "{}: {check:?}", c.name);
        }
    }

    #[test]
    fn halfline_facts() {
        let c = build_halfline(5, 10).unwrap();
        assert!(c.facts.iter().any(|f| matches!(f.rule, FactRule::SupLip { .. })));
        assert_facts(&c);
        let c = build_halfline(1, 4).unwrap();
        assert_eq!(c.space.distance(PointId(1), PointId(3)).unwrap(), 0.5);
    }

    #[test]
    fn halfline_field_is_distance_to_even() {
        let c = build_halfline(4, 4).unwrap();
        let g = c.field("g").unwrap();
        assert_eq!(g.get(PointId(5)), 0.75); // x = 1.25
        assert_eq!(g.get(PointId(14)), 0.5); // x = 3.5
        assert!(c.field("h").is_err());
    }

    #[test]
    fn cusp_facts() {
        let c = build_cusp(&cusp_ladder(0.01).unwrap()).unwrap();
        assert_eq!(c.facts.iter().filter(|f| matches!(f.rule, FactRule::Quotient { .. })).count(), 2);
        assert_facts(&c);
    }

    #[test]
    fn cusp_ladder_keeps_decades() {
        let ts = cusp_ladder(1e-3).unwrap();
        for d in [1e-3, 1e-2, 1e-1, 1.0] {
            assert!(ts.contains(&d));
        }
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
        assert!(cusp_ladder(0.0).is_err());
    }

    #[test]
    fn cusp_reparameterizations() {
        let ts: Vec<f64> = (0..=800).map(|i| 0.2 + i as f64 * 0.001).collect();
        assert_facts(&build_cusp_intrinsic(&ts).unwrap());
        assert_facts(&build_cusp_segment(&ts, 20).unwrap());
    }

    #[test]
    fn comb_facts() {
        let c = build_comb(5, 100).unwrap();
        assert!(c.facts.iter().any(|f| matches!(f.rule, FactRule::SupLip { .. })));
        assert_facts(&c);
        let f5 = c.field("f_5").unwrap();
        let p = c.find(FormulaPoint::Planar([1.0 / 3.0, 0.0])).unwrap();
        assert!((f5.get(p) - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        // zero on the hyperbola away from the arm tops
        let mid = c.sample().len() - 1;
        assert_eq!(f5.get(PointId(mid)), 0.0);
    }

    #[test]
    fn coarse_comb_drops_lip_facts() {
        let c = build_comb(12, 1).unwrap();
        assert!(!c.facts.iter().any(|f| matches!(f.rule, FactRule::SupLip { .. })));
        assert_facts(&c);
    }

    #[test]
    fn ball_sequence_facts() {
        let c = build_ball_sequence(4, 30).unwrap();
        assert_eq!(c.sample().len(), 120);
        assert_facts(&c);
    }

    #[test]
    fn slit_plane_facts() {
        let c = build_slit_plane(&[1.0, 1.5, 2.0, 3.0], 64).unwrap();
        assert!(c.facts.iter().any(|f| f.description == "arg(-1) = pi"));
        assert_facts(&c);
        let arg = c.field("arg").unwrap();
        assert!(arg.values().iter().all(|&a| a > 0.0 && a < 2.0 * PI));
    }
}
