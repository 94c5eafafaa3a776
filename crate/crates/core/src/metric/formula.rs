//! Closed-form metric spaces with exact distance rules.
//!
//! A [`FormulaSpace`] is an infinite space described by a point
//! parameterization and a distance rule. Finite computations run on a
//! [`FormulaSample`], a finite list of parameters evaluated lazily through
//! the rule, so large samples never need an explicit distance matrix.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Parameter of a point in a formula space: a real coordinate for
/// one-dimensional parameterizations, a planar coordinate otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormulaPoint {
    Scalar(f64),
    Planar([f64; 2]),
}

impl FormulaPoint {
    pub fn scalar(self) -> Option<f64> {
        match self {
            FormulaPoint::Scalar(t) => Some(t),
            FormulaPoint::Planar(_) => None,
        }
    }

    pub fn planar(self) -> Option<[f64; 2]> {
        match self {
            FormulaPoint::Planar(p) => Some(p),
            FormulaPoint::Scalar(_) => None,
        }
    }

    fn bits(self) -> (u8, u64, u64) {
        // -0.0 and 0.0 are the same point
        let norm = |v: f64| if v == 0.0 { 0u64 } else { v.to_bits() };
        match self {
            FormulaPoint::Scalar(t) => (0, norm(t), 0),
            FormulaPoint::Planar([x, y]) => (1, norm(x), norm(y)),
        }
    }
}

/// Width of the removed half-strip `{Re z >= 0, |Im z| <= SLIT_HALF_WIDTH}`.
pub const SLIT_HALF_WIDTH: f64 = 0.5;

const MEMBERSHIP_TOL: f64 = 1e-9;

/// The named closed-form spaces.
#[derive(Clone, Debug, PartialEq)]
pub enum FormulaSpace {
    /// The real line with `|x - y|`.
    Line,
    /// The Euclidean plane.
    Plane,
    /// `[0, n_max]` glued from unit intervals, interval `I_n = [n-1, n]`
    /// carrying `d_n(x, y) = f_n(|x - y|)`, distances across intervals
    /// telescoped through the integer endpoints.
    HalfLine { n_max: usize },
    /// The cusp `{(t^3, t^2) : -1 <= t <= 1}` with the Euclidean metric.
    Cusp,
    /// `[-1, 1]` with the cusp metric on each half and distances between
    /// the halves routed through the origin.
    CuspIntrinsic,
    /// The cusp with the segment `{(x, 1) : 1 <= x < 2}` attached at `(1, 1)`.
    CuspSegment,
    /// Vertical arms `{1/k} x [0, k]` for `k <= n_arms`, the axis
    /// `{0} x [0, inf)` and the hyperbola `y = 1/x`, Euclidean metric.
    Comb { n_arms: usize },
    /// Disjoint open discs shrinking towards the origin, Euclidean metric.
    BallSequence { count: usize },
    /// The plane minus the half-strip `{Re z >= 0, |Im z| <= 1/2}`.
    SlitPlane,
}

/// `f_n` from the half-line construction: the identity on `[0, 1/n]`, then
/// the chord with slope `1/n` up to `f_n(1) = (2n - 1)/n^2`.
pub fn halfline_profile(n: usize, s: f64) -> f64 {
    let nf = n as f64;
    if s <= 1.0 / nf {
        s
    } else {
        (nf * s + nf - 1.0) / (nf * nf)
    }
}

fn halfline_interval(x: f64) -> usize {
    (x.ceil() as usize).max(1)
}

fn halfline_distance(a: f64, b: f64) -> f64 {
    let (x, y) = if a <= b { (a, b) } else { (b, a) };
    if x == y {
        return 0.0;
    }
    let n = halfline_interval(x);
    let m = halfline_interval(y);
    if n == m {
        return halfline_profile(n, y - x);
    }
    let mut d = halfline_profile(n, n as f64 - x);
    for i in n + 1..m {
        d += halfline_profile(i, 1.0);
    }
    d + halfline_profile(m, y - (m - 1) as f64)
}

/// Center and radius of the `i`-th disc of the ball sequence (1-based).
pub fn ball_sequence_disc(i: usize) -> ([f64; 2], f64) {
    let scale = 0.5f64.powi(i as i32);
    ([-3.0 * scale, 0.0], 0.8 * scale)
}

pub fn cusp_point(t: f64) -> [f64; 2] {
    [t * t * t, t * t]
}

fn euclid(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl FormulaSpace {
    pub fn name(&self) -> &'static str {
        match self {
            FormulaSpace::Line => "line",
            FormulaSpace::Plane => "plane",
            FormulaSpace::HalfLine { .. } => "halfline",
            FormulaSpace::Cusp => "cusp",
            FormulaSpace::CuspIntrinsic => "cusp_intrinsic",
            FormulaSpace::CuspSegment => "cusp_segment",
            FormulaSpace::Comb { .. } => "comb",
            FormulaSpace::BallSequence { .. } => "ball_sequence",
            FormulaSpace::SlitPlane => "slit_plane",
        }
    }

    pub fn params(&self) -> Value {
        match self {
            FormulaSpace::HalfLine { n_max } => json!({ "n_max": n_max }),
            FormulaSpace::Comb { n_arms } => json!({ "n_arms": n_arms }),
            FormulaSpace::BallSequence { count } => json!({ "count": count }),
            _ => Value::Object(Map::new()),
        }
    }

    pub fn from_name(name: &str, params: &Value) -> Result<Self> {
        let count = |key: &str| -> Result<usize> {
            params
                .get(key)
                .and_then(Value::as_u64)
                .filter(|&v| v >= 1)
                .map(|v| v as usize)
                .ok_or_else(|| {
                    Error::MalformedSpace(format!(
                        "formula '{name}' needs a positive integer param '{key}'"
                    ))
                })
        };
        Ok(match name {
            "line" => FormulaSpace::Line,
            "plane" => FormulaSpace::Plane,
            "halfline" => FormulaSpace::HalfLine {
                n_max: count("n_max")?,
            },
            "cusp" => FormulaSpace::Cusp,
            "cusp_intrinsic" => FormulaSpace::CuspIntrinsic,
            "cusp_segment" => FormulaSpace::CuspSegment,
            "comb" => FormulaSpace::Comb {
                n_arms: count("n_arms")?,
            },
            "ball_sequence" => FormulaSpace::BallSequence {
                count: count("count")?,
            },
            "slit_plane" => FormulaSpace::SlitPlane,
            other => {
                return Err(Error::MalformedSpace(format!(
                    "unknown formula space '{other}'"
                )))
            }
        })
    }

    /// Exact distance rule.
    pub fn distance(&self, a: FormulaPoint, b: FormulaPoint) -> f64 {
        match (self, a, b) {
            (FormulaSpace::Line, FormulaPoint::Scalar(x), FormulaPoint::Scalar(y)) => (x - y).abs(),
            (FormulaSpace::HalfLine { .. }, FormulaPoint::Scalar(x), FormulaPoint::Scalar(y)) => {
                halfline_distance(x, y)
            }
            (FormulaSpace::Cusp, FormulaPoint::Scalar(s), FormulaPoint::Scalar(t)) => {
                euclid(cusp_point(s), cusp_point(t))
            }
            (FormulaSpace::CuspIntrinsic, FormulaPoint::Scalar(s), FormulaPoint::Scalar(t)) => {
                if (s <= 0.0 && t <= 0.0) || (s >= 0.0 && t >= 0.0) {
                    euclid(cusp_point(s), cusp_point(t))
                } else {
                    euclid(cusp_point(s), [0.0, 0.0]) + euclid([0.0, 0.0], cusp_point(t))
                }
            }
            (_, FormulaPoint::Planar(p), FormulaPoint::Planar(q)) => euclid(p, q),
            // parameters of the wrong shape are rejected by `validate`
            _ => f64::NAN,
        }
    }

    /// Euclidean embedding, when the distance rule is the planar Euclidean
    /// distance of the embedded points.
    pub fn embed(&self, p: FormulaPoint) -> Option<[f64; 2]> {
        match (self, p) {
            (FormulaSpace::Line, FormulaPoint::Scalar(x)) => Some([x, 0.0]),
            (FormulaSpace::Cusp, FormulaPoint::Scalar(t)) => Some(cusp_point(t)),
            (FormulaSpace::HalfLine { .. } | FormulaSpace::CuspIntrinsic, _) => None,
            (_, FormulaPoint::Planar(q)) => Some(q),
            _ => None,
        }
    }

    /// Checks that a parameter describes a point of the space.
    pub fn validate(&self, p: FormulaPoint) -> Result<()> {
        let bad = |why: &str| Err(Error::MalformedSpace(format!("{p:?} is not a point of {}: {why}", self.name())));
        let finite = match p {
            FormulaPoint::Scalar(t) => t.is_finite(),
            FormulaPoint::Planar([x, y]) => x.is_finite() && y.is_finite(),
        };
        if !finite {
            return bad("non-finite parameter");
        }
        match (self, p) {
            (FormulaSpace::Line, FormulaPoint::Scalar(_)) => Ok(()),
            (FormulaSpace::Plane, FormulaPoint::Planar(_)) => Ok(()),
            (FormulaSpace::HalfLine { n_max }, FormulaPoint::Scalar(x)) => {
                if (0.0..=*n_max as f64).contains(&x) {
                    Ok(())
                } else {
                    bad("outside [0, n_max]")
                }
            }
            (FormulaSpace::Cusp | FormulaSpace::CuspIntrinsic, FormulaPoint::Scalar(t)) => {
                if (-1.0..=1.0).contains(&t) {
                    Ok(())
                } else {
                    bad("parameter outside [-1, 1]")
                }
            }
            (FormulaSpace::CuspSegment, FormulaPoint::Planar([x, y])) => {
                let on_cusp = x.abs() <= 1.0 && (y * y * y - x * x).abs() <= MEMBERSHIP_TOL && y >= 0.0;
                let on_segment = (y - 1.0).abs() <= MEMBERSHIP_TOL && (1.0..2.0).contains(&x);
                if on_cusp || on_segment {
                    Ok(())
                } else {
                    bad("neither on the cusp nor on the segment")
                }
            }
            (FormulaSpace::Comb { n_arms }, FormulaPoint::Planar(q)) => {
                if comb_component(*n_arms, q).is_some() {
                    Ok(())
                } else {
                    bad("not on the axis, an arm or the hyperbola")
                }
            }
            (FormulaSpace::BallSequence { count }, FormulaPoint::Planar(q)) => {
                if ball_sequence_index(*count, q).is_some() {
                    Ok(())
                } else {
                    bad("not inside any disc")
                }
            }
            (FormulaSpace::SlitPlane, FormulaPoint::Planar([x, y])) => {
                if x >= 0.0 && y.abs() <= SLIT_HALF_WIDTH {
                    bad("inside the removed strip")
                } else {
                    Ok(())
                }
            }
            _ => bad("wrong parameter shape"),
        }
    }
}

/// Component of a comb point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombComponent {
    Axis,
    Arm(usize),
    Hyperbola,
}

/// Locates a planar point on the truncated comb. Arm tops lie on both an arm
/// and the hyperbola; they are reported as arm points.
pub fn comb_component(n_arms: usize, [x, y]: [f64; 2]) -> Option<CombComponent> {
    if y < -MEMBERSHIP_TOL {
        return None;
    }
    if x.abs() <= MEMBERSHIP_TOL {
        return Some(CombComponent::Axis);
    }
    if x <= 0.0 {
        return None;
    }
    let k = (1.0 / x).round();
    if k >= 1.0 && k <= n_arms as f64 && (x - 1.0 / k).abs() <= MEMBERSHIP_TOL * x && y <= k + MEMBERSHIP_TOL {
        return Some(CombComponent::Arm(k as usize));
    }
    if x <= 1.0 + MEMBERSHIP_TOL && x >= 1.0 / n_arms as f64 - MEMBERSHIP_TOL && (x * y - 1.0).abs() <= MEMBERSHIP_TOL {
        return Some(CombComponent::Hyperbola);
    }
    None
}

/// Index (1-based) of the open disc containing `q`.
pub fn ball_sequence_index(count: usize, q: [f64; 2]) -> Option<usize> {
    (1..=count).find(|&i| {
        let (c, r) = ball_sequence_disc(i);
        euclid(c, q) < r
    })
}

/// A finite set of parameters of a formula space.
#[derive(Clone, Debug)]
pub struct FormulaSample {
    space: FormulaSpace,
    points: Vec<FormulaPoint>,
    embedded: Option<Vec<[f64; 2]>>,
}

impl FormulaSample {
    /// Validates every parameter and rejects duplicates.
    pub fn new(space: FormulaSpace, points: Vec<FormulaPoint>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DuplicatePoint(format!(
                "a sample needs at least 2 distinct points, got {}",
                points.len()
            )));
        }
        for &p in &points {
            space.validate(p)?;
        }
        let mut keys: Vec<_> = points.iter().enumerate().map(|(i, p)| (p.bits(), i)).collect();
        keys.sort_unstable();
        if let Some(w) = keys.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::DuplicatePoint(format!(
                "parameters {} and {} coincide ({:?})",
                w[0].1, w[1].1, points[w[0].1]
            )));
        }
        let embedded = points.iter().map(|&p| space.embed(p)).collect::<Option<Vec<_>>>();
        Ok(Self {
            space,
            points,
            embedded,
        })
    }

    pub fn space(&self) -> &FormulaSpace {
        &self.space
    }

    pub fn points(&self) -> &[FormulaPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn embedded(&self) -> Option<&[[f64; 2]]> {
        self.embedded.as_deref()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        self.space.distance(self.points[i], self.points[j])
    }
}
