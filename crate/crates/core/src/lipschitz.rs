//! Pointwise (infinitesimal) Lipschitz constants and the norms built on them.
//!
//! `Lip f(x)` is a `limsup` as `y -> x`; on finite data it is estimated by
//! the largest difference quotient inside the finest ball of a
//! [`ScaleSchedule`]. Points whose finest ball holds no other point report
//! `0`, the isolated-point convention, and are flagged.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointId, ScalarField};

/// Relative spread of the last three slope values below which an estimate is
/// called converged.
pub const CONVERGENCE_SPREAD: f64 = 0.01;

/// Strictly decreasing radii `r_0 > r_1 > ... > r_K`, `K >= 1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleSchedule {
    radii: Vec<f64>,
}

impl ScaleSchedule {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 {
            return Err(Error::InvalidArgument("a scale schedule needs at least two radii".into()));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument("radii must be positive and finite".into()));
        }
        if radii.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidArgument("radii must be strictly decreasing".into()));
        }
        Ok(Self { radii })
    }

    /// `r_0, r_0 * ratio, r_0 * ratio^2, ...` down to the last radius `>= r_min`.
    pub fn geometric(r0: f64, ratio: f64, r_min: f64) -> Result<Self> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidArgument(format!("ratio {ratio} must lie in (0, 1)")));
        }
        if !(r_min > 0.0 && r0 >= r_min) {
            return Err(Error::InvalidArgument(format!("need 0 < r_min <= r0, got r0 = {r0}, r_min = {r_min}")));
        }
        let mut radii = vec![r0];
        loop {
            let next = radii[radii.len() - 1] * ratio;
            if next < r_min {
                break;
            }
            radii.push(next);
        }
        Self::new(radii)
    }

    /// Halving scales from a quarter of the diameter down to twice the
    /// sampling resolution.
    pub fn default_for(space: &MetricSpace) -> Result<Self> {
        let resolution = space
            .resolution()
            .ok_or_else(|| Error::InvalidArgument("space has no two points at positive distance".into()))?;
        let r_min = 2.0 * resolution;
        let r0 = space.diameter() / 4.0;
        match Self::geometric(r0, 0.5, r_min) {
            Ok(s) => Ok(s),
            Err(_) => Self::new(vec![2.0 * r_min, r_min]),
        }
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn finest(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScaleValue {
    pub r: f64,
    #[serde(rename = "D_r")]
    pub d_r: f64,
    #[serde(rename = "S_r")]
    pub s_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipEstimate {
    pub point: PointId,
    pub value: f64,
    pub scales: Vec<ScaleValue>,
    pub converged: bool,
    #[serde(rename = "isolated")]
    pub isolated_at_finest: bool,
}

impl LipEstimate {
    fn from_scales(point: PointId, scales: Vec<ScaleValue>, isolated_at_finest: bool) -> Self {
        let value = scales.last().map_or(0.0, |s| s.s_r);
        let tail = &scales[scales.len().saturating_sub(3)..];
        let hi = tail.iter().map(|s| s.s_r).fold(0.0, f64::max);
        let lo = tail.iter().map(|s| s.s_r).fold(f64::INFINITY, f64::min);
        let converged = hi == 0.0 || (hi - lo) / hi < CONVERGENCE_SPREAD;
        Self {
            point,
            value,
            scales,
            converged,
            isolated_at_finest,
        }
    }
}

fn check_field(space: &MetricSpace, f: &ScalarField) -> Result<()> {
    f.ensure_matches(space)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("radius {r} must be positive")))
    }
}

/// `(1/r) * max |f(y) - f(x)|` over `0 < d(x, y) <= r`; `0` for an empty ball.
pub fn d_r_oscillation(space: &MetricSpace, f: &ScalarField, x: PointId, r: f64) -> Result<f64> {
    check_field(space, f)?;
    space.check(x)?;
    check_radius(r)?;
    let fx = f.get(x);
    let osc = space
        .row(x)
        .into_iter()
        .enumerate()
        .filter(|&(j, d)| j != x.0 && d > 0.0 && d <= r)
        .map(|(j, _)| (f.values()[j] - fx).abs())
        .fold(0.0, f64::max);
    Ok(osc / r)
}

/// `max |f(y) - f(x)| / d(x, y)` over `0 < d(x, y) <= r`; `0` for an empty
/// ball. Nondecreasing in `r`.
pub fn slope_sup(space: &MetricSpace, f: &ScalarField, x: PointId, r: f64) -> Result<f64> {
    check_field(space, f)?;
    space.check(x)?;
    check_radius(r)?;
    let fx = f.get(x);
    Ok(space
        .row(x)
        .into_iter()
        .enumerate()
        .filter(|&(j, d)| j != x.0 && d > 0.0 && d <= r)
        .map(|(j, d)| (f.values()[j] - fx).abs() / d)
        .fold(0.0, f64::max))
}

/// `|f(x) - f(y)| / d(x, y)`.
pub fn difference_quotient(space: &MetricSpace, f: &ScalarField, x: PointId, y: PointId) -> Result<f64> {
    check_field(space, f)?;
    let d = space.distance(x, y)?;
    let df = (f.get(x) - f.get(y)).abs();
    if d == 0.0 {
        if df == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::DegenerateMetric { x, y });
    }
    Ok(df / d)
}

pub fn lip_estimate(space: &MetricSpace, f: &ScalarField, x: PointId, schedule: &ScaleSchedule) -> Result<LipEstimate> {
    check_field(space, f)?;
    space.check(x)?;
    let row = space.row(x);
    let fx = f.get(x);
    let mut isolated = true;
    let scales = schedule
        .radii()
        .iter()
        .map(|&r| {
            let mut osc = 0.0f64;
            let mut slope = 0.0f64;
            let mut any = false;
            for (j, &d) in row.iter().enumerate() {
                if j != x.0 && d > 0.0 && d <= r {
                    let df = (f.values()[j] - fx).abs();
                    osc = osc.max(df);
                    slope = slope.max(df / d);
                    any = true;
                }
            }
            isolated = !any;
            ScaleValue {
                r,
                d_r: osc / r,
                s_r: slope,
            }
        })
        .collect();
    Ok(LipEstimate::from_scales(x, scales, isolated))
}

/// [`lip_estimate`] at every point, sharing one neighbour index per scale.
pub fn lip_field(space: &MetricSpace, f: &ScalarField, schedule: &ScaleSchedule) -> Result<Vec<LipEstimate>> {
    check_field(space, f)?;
    let n = space.len();
    let mut per_point: Vec<Vec<ScaleValue>> = vec![Vec::with_capacity(schedule.radii().len()); n];
    let mut isolated = vec![true; n];
    for &r in schedule.radii() {
        let hood = space.neighborhoods(r);
        let values: Vec<(ScaleValue, bool)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let fx = f.values()[i];
                let neighbors = hood.of(PointId(i));
                let mut osc = 0.0f64;
                let mut slope = 0.0f64;
                for &(j, d) in &neighbors {
                    let df = (f.get(j) - fx).abs();
                    osc = osc.max(df);
                    slope = slope.max(df / d);
                }
                (
                    ScaleValue {
                        r,
                        d_r: osc / r,
                        s_r: slope,
                    },
                    neighbors.is_empty(),
                )
            })
            .collect();
        for (i, (v, iso)) in values.into_iter().enumerate() {
            per_point[i].push(v);
            isolated[i] = iso;
        }
    }
    Ok(per_point
        .into_iter()
        .zip(isolated)
        .enumerate()
        .map(|(i, (scales, iso))| LipEstimate::from_scales(PointId(i), scales, iso))
        .collect())
}

/// Largest value of a Lip field and the first point attaining it.
pub fn sup_lip(estimates: &[LipEstimate]) -> (f64, Option<PointId>) {
    let mut best = (0.0, None);
    for e in estimates {
        if best.1.is_none() || e.value > best.0 {
            best = (e.value, Some(e.point));
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LipschitzConstant {
    pub value: f64,
    /// Lexicographically first pair attaining the value.
    pub witness: Option<(PointId, PointId)>,
}

/// Global Lipschitz constant `max |f(x) - f(y)| / d(x, y)` over all pairs.
/// Pairs in different graph components are skipped.
pub fn global_lip_constant(space: &MetricSpace, f: &ScalarField) -> Result<LipschitzConstant> {
    check_field(space, f)?;
    let n = space.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two points".into()));
    }
    let rows: Vec<Result<(f64, Option<usize>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let row = space.row(PointId(i));
            let fi = f.values()[i];
            let mut best = (0.0f64, None);
            for (j, &d) in row.iter().enumerate().skip(i + 1) {
                let df = (f.values()[j] - fi).abs();
                if d == 0.0 {
                    if df > 0.0 {
                        return Err(Error::DegenerateMetric {
                            x: PointId(i),
                            y: PointId(j),
                        });
                    }
                    continue;
                }
                if d.is_infinite() {
                    continue;
                }
                let q = df / d;
                if best.1.is_none() || q > best.0 {
                    best = (q, Some(j));
                }
            }
            Ok(best)
        })
        .collect();
    let mut out = LipschitzConstant {
        value: 0.0,
        witness: None,
    };
    for (i, row) in rows.into_iter().enumerate() {
        let (q, j) = row?;
        if let Some(j) = j {
            if out.witness.is_none() || q > out.value {
                out = LipschitzConstant {
                    value: q,
                    witness: Some((PointId(i), PointId(j))),
                };
            }
        }
    }
    Ok(out)
}

/// `max(sup |f|, sup_x Lip f(x))`.
pub fn d_infty_norm(space: &MetricSpace, f: &ScalarField, schedule: &ScaleSchedule) -> Result<f64> {
    let field = lip_field(space, f, schedule)?;
    Ok(f.sup_norm().max(sup_lip(&field).0))
}

/// `max(|f(x0)|, sup_x Lip f(x))`.
pub fn d_norm(space: &MetricSpace, f: &ScalarField, basepoint: PointId, schedule: &ScaleSchedule) -> Result<f64> {
    space.check(basepoint)?;
    let field = lip_field(space, f, schedule)?;
    Ok(f.get(basepoint).abs().max(sup_lip(&field).0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalWitness {
    pub point: PointId,
    pub radius: f64,
    pub value: f64,
    pub pair: Option<(PointId, PointId)>,
}

/// Scale-relative membership in `D(X)`, `LIP(X)` and `LIP_loc(X)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipReport {
    pub in_d: bool,
    pub in_lip: bool,
    pub in_lip_loc: bool,
    pub lip_threshold: f64,
    pub finest_scale: f64,
    pub sup_lip: f64,
    pub sup_lip_point: Option<PointId>,
    pub global_lip: LipschitzConstant,
    /// Largest restricted Lipschitz constant over the local balls.
    pub local_max: f64,
    pub local_witness: Option<LocalWitness>,
}

fn restricted_constant(space: &MetricSpace, f: &ScalarField, ball: &[PointId]) -> Result<(f64, Option<(PointId, PointId)>)> {
    let mut best = (0.0, None);
    for (a, &y) in ball.iter().enumerate() {
        for &z in &ball[a + 1..] {
            let d = space.distance_or_inf(y, z);
            if d.is_infinite() {
                continue;
            }
            let df = (f.get(y) - f.get(z)).abs();
            if d == 0.0 {
                if df > 0.0 {
                    return Err(Error::DegenerateMetric { x: y, y: z });
                }
                continue;
            }
            let q = df / d;
            if best.1.is_none() || q > best.0 {
                best = (q, Some((y, z)));
            }
        }
    }
    Ok(best)
}

/// Classifies `f` against `lip_threshold`:
///
/// * `in_d`: every finest-scale Lip estimate is at most the threshold;
/// * `in_lip`: the global constant is at most the threshold;
/// * `in_lip_loc`: around every point, the finest schedule ball containing
///   another point carries a restricted constant at most the threshold.
///
/// Points isolated at every scale impose no local condition.
pub fn classify_membership(
    space: &MetricSpace,
    f: &ScalarField,
    schedule: &ScaleSchedule,
    lip_threshold: f64,
) -> Result<MembershipReport> {
    let field = lip_field(space, f, schedule)?;
    let (sup, sup_point) = sup_lip(&field);
    let global = global_lip_constant(space, f)?;

    let hoods: Vec<_> = schedule.radii().iter().rev().map(|&r| space.neighborhoods(r)).collect();
    let locals: Vec<Result<Option<LocalWitness>>> = space
        .points()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|x| {
            for hood in &hoods {
                let neighbors = hood.of(x);
                if neighbors.is_empty() {
                    continue;
                }
                let mut ball: Vec<PointId> = neighbors.into_iter().map(|(p, _)| p).collect();
                ball.push(x);
                ball.sort_unstable();
                let (value, pair) = restricted_constant(space, f, &ball)?;
                return Ok(Some(LocalWitness {
                    point: x,
                    radius: hood.radius(),
                    value,
                    pair,
                }));
            }
            Ok(None)
        })
        .collect();
    let mut local_max = 0.0;
    let mut local_witness: Option<LocalWitness> = None;
    for w in locals {
        if let Some(w) = w? {
            if local_witness.is_none() || w.value > local_max {
                local_max = w.value;
                local_witness = Some(w);
            }
        }
    }
    Ok(MembershipReport {
        in_d: sup <= lip_threshold,
        in_lip: global.value <= lip_threshold,
        in_lip_loc: local_max <= lip_threshold,
        lip_threshold,
        finest_scale: schedule.finest(),
        sup_lip: sup,
        sup_lip_point: sup_point,
        global_lip: global,
        local_max,
        local_witness,
    })
}
