//! Full Lutz twist on the core of a standard-model tube, and detection of
//! the resulting overtwisted disks.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::foliated::{FoliatedContactPair, LeafContactForm};
use crate::forms::{Axis, AxisKind, Chart, ClampedPoly, DifferentialForm, Expr, Grid, ScalarField};
use crate::tolerance::EXACT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Twist {
    Full,
}

/// Radial pair `(h1, h2)` replacing `(1, r^2)`: the untwisted vector rotated
/// by `angle(r)`, equal to `(1, r^2)` on `[r_outer - eps_match, r_outer]`.
#[derive(Debug, Clone)]
pub struct LutzProfile {
    pub h1: ScalarField,
    pub h2: ScalarField,
    /// Rotation relative to `(1, r^2)`.
    pub angle: ScalarField,
    pub r_outer: f64,
    pub eps_match: f64,
    pub twist: Twist,
}

impl LutzProfile {
    /// Start of the matching zone.
    pub fn r_match(&self) -> f64 {
        self.r_outer - self.eps_match
    }

    /// `h1 h2' - h2 h1'` at `r`.
    pub fn contact_term(&self, r: f64) -> f64 {
        let (h1, h2) = (self.h1.expr(), self.h2.expr());
        h1.eval(&[r]) * h2.diff(0).eval(&[r]) - h2.eval(&[r]) * h1.diff(0).eval(&[r])
    }
}

/// Radial chart for profile functions.
fn radial_chart(r_outer: f64) -> Result<Arc<Chart>> {
    Ok(Arc::new(Chart::new(vec![Axis::bounded("r", 0.0, r_outer)])?))
}

/// Profile with `eps_match = r_outer / 10`.
pub fn lutz_profile(r_outer: f64) -> Result<LutzProfile> {
    lutz_profile_with_match(r_outer, r_outer / 10.0)
}

/// Twisting zone `[0.1 R, R - eps]` with a C2 smooth-step angle rising from
/// 0 to 2 pi. Requires `R >= 10 eps`.
pub fn lutz_profile_with_match(r_outer: f64, eps_match: f64) -> Result<LutzProfile> {
    if !(r_outer > 0.0 && r_outer.is_finite() && eps_match > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "profile needs R > 0 and eps > 0, got R = {r_outer}, eps = {eps_match}"
        )));
    }
    if r_outer < 10.0 * eps_match * (1.0 - 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "R = {r_outer} cannot fit a matching zone of width {eps_match} (needs R >= 10 eps)"
        )));
    }
    let start = 0.1 * r_outer;
    let r_match = r_outer - eps_match;
    let r = Expr::var(0);
    let x = r.sub(&Expr::constant(start)).scale(1.0 / (r_match - start));
    let angle = x.clamped(ClampedPoly::smoothstep()).scale(TAU);
    let r2 = r.powi(2);
    let (c, s) = (angle.cos(), angle.sin());
    let twisted1 = c.sub(&r2.mul(&s));
    let twisted2 = s.add(&r2.mul(&c));
    let h1 = r.select_below(r_match, &twisted1, &Expr::one());
    let h2 = r.select_below(r_match, &twisted2, &r2);
    let chart = radial_chart(r_outer)?;
    Ok(LutzProfile {
        h1: ScalarField::new(chart.clone(), h1),
        h2: ScalarField::new(chart.clone(), h2),
        angle: ScalarField::new(chart, angle),
        r_outer,
        eps_match,
        twist: Twist::Full,
    })
}

pub(crate) struct RadialAxes {
    pub r: usize,
    pub theta: usize,
    pub z: usize,
}

pub(crate) fn radial_axes(chart: &Chart) -> Result<RadialAxes> {
    let find = |n: &str| {
        chart
            .axis_index(n)
            .ok_or_else(|| Error::InvalidParameter(format!("chart has no '{n}' axis (non-radial input)")))
    };
    let axes = RadialAxes {
        r: find("r")?,
        theta: find("theta")?,
        z: find("z")?,
    };
    if !matches!(chart.axes()[axes.theta].kind, AxisKind::Periodic { .. }) {
        return Err(Error::InvalidParameter("theta axis must be periodic".into()));
    }
    Ok(axes)
}

/// Grid points of `grid` with `r <= r_max`, worst deviation of `alpha` from
/// `dz + r^2 dtheta` there.
pub(crate) fn standard_deviation(alpha: &DifferentialForm, axes: &RadialAxes, r_max: f64, grid: &Grid) -> Result<(f64, Vec<f64>)> {
    let chart = alpha.chart();
    let mut worst = (0.0, Vec::new());
    for p in grid.points(chart)? {
        if p[axes.r] > r_max {
            continue;
        }
        let q = chart.reduce(&p);
        let a = alpha.covector_at(&q);
        let dev = a
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let target = if i == axes.z {
                    1.0
                } else if i == axes.theta {
                    q[axes.r] * q[axes.r]
                } else {
                    0.0
                };
                (v - target).abs()
            })
            .fold(0.0, f64::max);
        if dev > worst.0 || worst.1.is_empty() {
            worst = (dev, p);
        }
    }
    Ok(worst)
}

/// Replace `dz + r^2 dtheta` by `h1 dz + h2 dtheta` for `r < r_match`;
/// every coefficient is untouched elsewhere.
pub fn lutz_twist(pair: &FoliatedContactPair, profile: &LutzProfile) -> Result<FoliatedContactPair> {
    let chart = pair.chart();
    let axes = radial_axes(chart)?;
    let AxisKind::Bounded { hi: r_hi, .. } = chart.axes()[axes.r].kind else {
        return Err(Error::InvalidParameter("r axis must be bounded".into()));
    };
    if profile.r_outer > r_hi + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "twist radius {} exceeds the chart radius {r_hi}",
            profile.r_outer
        )));
    }
    let grid = Grid::default_for(chart).with(
        axes.r,
        crate::forms::AxisSamples::Range {
            lo: crate::tolerance::R_MIN,
            hi: profile.r_outer,
            n: crate::tolerance::DEFAULT_GRID,
        },
    );
    let (deviation, point) = standard_deviation(pair.alpha(), &axes, profile.r_outer, &grid)?;
    if deviation > EXACT_TOL {
        return Err(Error::ModelMismatch { deviation, point });
    }
    let map = [axes.r];
    let r = Expr::var(axes.r);
    let h1 = profile.h1.expr().reindex(&map);
    let h2 = profile.h2.expr().reindex(&map);
    let terms: Vec<(Vec<usize>, Expr)> = (0..chart.dim())
        .map(|i| {
            let orig = pair.alpha().component(&[i]);
            let coeff = if i == axes.z {
                r.select_below(profile.r_match(), &h1, &orig)
            } else if i == axes.theta {
                r.select_below(profile.r_match(), &h2, &orig)
            } else {
                orig
            };
            (vec![i], coeff)
        })
        .collect();
    let alpha = DifferentialForm::from_terms(chart.clone(), 1, terms)?;
    FoliatedContactPair::new(pair.beta().clone(), alpha, pair.orientation().clone())?
        .certify(&Grid::default_for(chart))
}

/// Samples per unit radius of the coarse angle scan.
const SCAN_DENSITY: f64 = 4096.0;

/// Smallest `r > 0` at which the angle of `(alpha(d/dz), alpha(d/dtheta))`
/// (sampled at `theta = 0`, `z = 0`) reaches `pi`, if any.
pub fn detect_overtwisted_disk(leaf: &LeafContactForm) -> Result<Option<f64>> {
    let chart = leaf.chart();
    let axes = radial_axes(chart)?;
    let AxisKind::Bounded { lo, hi } = chart.axes()[axes.r].kind else {
        return Err(Error::InvalidParameter("r axis must be bounded".into()));
    };
    let alpha = leaf.alpha();
    let base_point = |r: f64, theta: f64, z: f64| {
        let mut p: Vec<f64> = chart
            .axes()
            .iter()
            .map(|a| {
                let (l, h) = a.range();
                0.0f64.clamp(l, h)
            })
            .collect();
        p[axes.r] = r;
        p[axes.theta] = theta;
        p[axes.z] = z.clamp(chart.axes()[axes.z].range().0, chart.axes()[axes.z].range().1);
        p
    };
    let h = |r: f64| {
        let a = alpha.covector_at(&base_point(r, 0.0, 0.0));
        (a[axes.z], a[axes.theta])
    };
    // radial structure: no dr part, no dependence on theta or z
    let (zlo, zhi) = chart.axes()[axes.z].range();
    for k in 0..9 {
        let r = lo + (hi - lo) * (k as f64 + 0.5) / 9.0;
        let (h1, h2) = h(r);
        let scale = 1.0 + h1.abs() + h2.abs();
        for (theta, z) in [(1.0, 0.0), (PI, zlo), (4.0, zhi), (0.5, 0.5 * (zlo + zhi))] {
            let a = alpha.covector_at(&base_point(r, theta, z));
            let dev = (a[axes.z] - h1).abs().max((a[axes.theta] - h2).abs()).max(a[axes.r].abs());
            if dev > 1e-9 * scale {
                return Err(Error::InvalidParameter(format!(
                    "non-radial input: alpha varies by {dev:e} at r = {r}"
                )));
            }
        }
    }
    let n = ((hi - lo) * SCAN_DENSITY).ceil().max(64.0) as usize;
    let (h1, h2) = h(lo);
    let mut prev_r = lo;
    let mut prev = h2.atan2(h1);
    for k in 1..=n {
        let r = lo + (hi - lo) * k as f64 / n as f64;
        let (h1, h2) = h(r);
        let raw = h2.atan2(h1);
        let mut a = raw;
        while a - prev > PI {
            a -= TAU;
        }
        while a - prev < -PI {
            a += TAU;
        }
        if prev < PI && a >= PI {
            // h2 changes sign from + to - across the crossing, with h1 < 0
            let (mut left, mut right) = (prev_r, r);
            for _ in 0..200 {
                let mid = 0.5 * (left + right);
                if mid <= left || mid >= right {
                    break;
                }
                if h(mid).1 > 0.0 {
                    left = mid;
                } else {
                    right = mid;
                }
            }
            let (l1, l2) = h(left);
            let (r1, r2) = h(right);
            let root = if (l2.abs() / l1.abs()) <= (r2.abs() / r1.abs()) { left } else { right };
            return Ok(Some(root));
        }
        prev = a;
        prev_r = r;
    }
    Ok(None)
}
