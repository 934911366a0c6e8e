//! A Lutz twist switched on and off along a parameter interval.

use std::sync::Arc;

use serde::Serialize;

use super::lutz::{lutz_profile, LutzProfile};
use crate::error::{Error, Result};
use crate::foliated::LeafContactForm;
use crate::forms::{Axis, Chart, ClampedPoly, DifferentialForm, Expr, Grid, ScalarField};
use crate::models::{local_chart, polar_leaf_chart};

/// Open interval `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, t: f64) -> bool {
        t > self.lo && t < self.hi
    }
}

/// `I`, `I1`, `I2` with `I` properly inside `I1` and the closure of `I1`
/// inside `I2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NestedIntervals {
    pub inner: Interval,
    pub middle: Interval,
    pub outer: Interval,
}

impl NestedIntervals {
    pub fn validate(&self) -> Result<()> {
        let (i, i1, i2) = (self.inner, self.middle, self.outer);
        let ordered = [i, i1, i2].iter().all(|x| x.lo < x.hi && x.lo.is_finite() && x.hi.is_finite());
        let proper = i1.lo <= i.lo && i.hi <= i1.hi && (i1.lo < i.lo || i.hi < i1.hi);
        let strict = i2.lo < i1.lo && i1.hi < i2.hi;
        if ordered && proper && strict {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "intervals must nest as I < I1 < I2 with closure(I1) inside I2, got {:?}",
                self
            )))
        }
    }
}

/// Leafwise contact flag at one parameter value.
#[derive(Debug, Clone, Serialize)]
pub struct MaskEntry {
    pub t: f64,
    pub chi: f64,
    pub contact: bool,
    pub min_ratio: f64,
}

/// Plane fields `xi^{chi(t)}` on the leaves `t = const` of `I2 x D^3`.
#[derive(Debug, Clone)]
pub struct VanishingLutzFamily {
    pub intervals: NestedIntervals,
    pub chi: ScalarField,
    pub profile: LutzProfile,
    /// Chart `(r, theta, z, t)` with `t` over `I2`.
    pub chart: Arc<Chart>,
    /// Defining 1-form of the whole family on `chart`.
    pub alpha: DifferentialForm,
    pub contact_mask: Vec<MaskEntry>,
}

/// Fraction of `I1.lo - I2.lo` (and of `I2.hi - I1.hi`) where `chi = 0`.
const CUTOFF_MARGIN: f64 = 0.1;

/// Parameter samples used for the mask, on top of the interval endpoints.
const MASK_SAMPLES: usize = 41;

/// Covector of the plane field at twist strength `k` in `[0, 1]`, on a chart
/// ordered `(r, theta, z, ...)`:
/// `g1 (dz + r^2 dtheta) + g2 (-r^2 dz + dtheta) + g3 sqrt(1 + r^4) dr`
/// with `g = (1 - k^2 (1 - cos a), k sin a, sqrt(1 - k^2) k (1 - cos a))`,
/// a unit-length path from the untwisted vector (`k = 0`) to its rotation
/// by the profile angle `a` (`k = 1`). For `r >= r_match` it is exactly the
/// untwisted form.
pub(crate) fn homotopy_coefficients(profile: &LutzProfile, k: &Expr, dim: usize) -> Vec<Expr> {
    let r = Expr::var(0);
    let r2 = r.powi(2);
    let a = profile.angle.expr().clone();
    let one_minus_cos = Expr::one().sub(&a.cos());
    let g1 = Expr::one().sub(&k.powi(2).mul(&one_minus_cos));
    let g2 = k.mul(&a.sin());
    let m = Expr::one().sub(&k.powi(2)).sqrt();
    let g3 = m.mul(k).mul(&one_minus_cos);
    let rm = profile.r_match();
    let mut coeffs = vec![Expr::zero(); dim];
    coeffs[0] = r.select_below(rm, &g3.mul(&Expr::one().add(&r2.powi(2)).sqrt()), &Expr::zero());
    coeffs[1] = r.select_below(rm, &g1.mul(&r2).add(&g2), &r2);
    coeffs[2] = r.select_below(rm, &g1.sub(&g2.mul(&r2)), &Expr::one());
    coeffs
}

impl VanishingLutzFamily {
    /// The family's plane field on the leaf `t` (chart `(r, theta, z)`).
    pub fn leaf(&self, t: f64) -> Result<LeafContactForm> {
        let leaf_chart = Arc::new(self.chart.without_axis(3)?);
        let alpha = self.alpha.restrict(3, t, leaf_chart.clone())?;
        LeafContactForm::new(alpha, DifferentialForm::volume(leaf_chart, 1.0))
    }

    /// The leaf plane field at twist strength `s` (independent of `t`).
    pub fn profile_path(&self, s: f64) -> Result<DifferentialForm> {
        let leaf_chart = Arc::new(self.chart.without_axis(3)?);
        DifferentialForm::one_form(leaf_chart, homotopy_coefficients(&self.profile, &Expr::constant(s), 3))
    }

    pub fn chi_at(&self, t: f64) -> f64 {
        self.chi.expr().eval(&[t])
    }
}

/// Cut-off equal to 1 on `I1`, 0 within the margin of `I2`'s ends, monotone
/// in between.
pub fn cutoff(intervals: &NestedIntervals) -> Result<ScalarField> {
    intervals.validate()?;
    let (i1, i2) = (intervals.middle, intervals.outer);
    let t = Expr::var(0);
    let lo0 = i2.lo + CUTOFF_MARGIN * (i1.lo - i2.lo);
    let hi0 = i2.hi - CUTOFF_MARGIN * (i2.hi - i1.hi);
    let rise = t.sub(&Expr::constant(lo0)).scale(1.0 / (i1.lo - lo0)).clamped(ClampedPoly::smoothstep());
    let fall = Expr::constant(hi0).sub(&t).scale(1.0 / (hi0 - i1.hi)).clamped(ClampedPoly::smoothstep());
    let chart = Arc::new(Chart::new(vec![Axis::bounded("t", i2.lo, i2.hi)])?);
    Ok(ScalarField::new(chart, rise.mul(&fall)))
}

/// Build the family over `I2` with twist radius `r_outer` and compute its
/// contact mask on a leaf grid.
pub fn vanishing_lutz_family(intervals: NestedIntervals, r_outer: f64) -> Result<VanishingLutzFamily> {
    let chi = cutoff(&intervals)?;
    let profile = lutz_profile(r_outer)?;
    let base = local_chart(r_outer)?;
    let mut axes = base.axes().to_vec();
    axes[3] = Axis::bounded("t", intervals.outer.lo, intervals.outer.hi);
    let chart = Arc::new(Chart::new(axes)?);
    let k = chi.expr().reindex(&[3]);
    let alpha = DifferentialForm::one_form(chart.clone(), homotopy_coefficients(&profile, &k, 4))?;
    let mut family = VanishingLutzFamily {
        intervals,
        chi,
        profile,
        chart,
        alpha,
        contact_mask: Vec::new(),
    };
    let (lo, hi) = (intervals.outer.lo, intervals.outer.hi);
    let mut ts: Vec<f64> = (1..MASK_SAMPLES)
        .map(|i| lo + (hi - lo) * i as f64 / MASK_SAMPLES as f64)
        .collect();
    ts.extend([intervals.middle.lo, intervals.middle.hi, intervals.inner.lo, intervals.inner.hi]);
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let grid = Grid::default_for(&*polar_leaf_chart(r_outer)?);
    let mut mask = Vec::with_capacity(ts.len());
    for t in ts {
        let report = family.leaf(t)?.verify(&grid)?;
        mask.push(MaskEntry {
            t,
            chi: family.chi_at(t),
            contact: report.passed,
            min_ratio: report.min_ratio,
        });
    }
    family.contact_mask = mask;
    Ok(family)
}
