//! Radial cut-off blending a coefficient into `delta r^2` near the core.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::foliated::{sweep, verify_radial_bounds, RadialBoundsReport};
use crate::forms::{ClampedPoly, Expr, Grid, ScalarField};
use crate::tolerance::Tier;

/// Positivity of `d_r f~ = chi' (delta r^2 - f) + (2 r delta chi + d_r f (1 - chi))`.
#[derive(Debug, Clone, Serialize)]
pub struct BlendReport {
    pub passed: bool,
    pub tier: Tier,
    pub points_checked: usize,
    /// min of `chi' (delta r^2 - f)`.
    pub min_cutoff_term: f64,
    /// min of `2 r delta chi + d_r f (1 - chi)`.
    pub min_radial_term: f64,
    /// min of `d_r f~`.
    pub min_derivative: f64,
    pub witness: Option<Vec<f64>>,
    /// Bounds of the input, for reference.
    pub input_bounds: RadialBoundsReport,
}

#[derive(Debug, Clone)]
pub struct Interpolation {
    pub field: ScalarField,
    /// The cut-off `chi(r)`.
    pub chi: ScalarField,
    pub report: BlendReport,
}

/// `f~ = delta r^2 chi(r) + f (1 - chi(r))` with `chi = 1` on `[0, R/3]` and
/// `chi = 0` from `2R/3` on.
pub fn interpolate_to_standard(f: &ScalarField, r_axis: usize, delta: f64, r_outer: f64, grid: &Grid) -> Result<Interpolation> {
    let chart = f.chart();
    if r_axis >= chart.dim() {
        return Err(Error::InvalidParameter(format!("no axis {r_axis}")));
    }
    if !(r_outer > 0.0 && delta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need R > 0 and delta > 0, got R = {r_outer}, delta = {delta}"
        )));
    }
    let r = Expr::var(r_axis);
    let third = r_outer / 3.0;
    let chi = Expr::one().sub(&r.sub(&Expr::constant(third)).scale(1.0 / third).clamped(ClampedPoly::smoothstep()));
    let target = r.powi(2).scale(delta);
    let one_minus = Expr::one().sub(&chi);
    let blended = target.mul(&chi).add(&f.expr().mul(&one_minus));

    let dchi = chi.diff(r_axis);
    let df = f.expr().diff(r_axis);
    let values = sweep(chart, grid, |q| {
        let rv = q[r_axis];
        if rv <= 0.0 {
            return None;
        }
        let c = chi.eval(q);
        let cutoff_term = dchi.eval(q) * (delta * rv * rv - f.expr().eval(q));
        let radial_term = 2.0 * rv * delta * c + df.eval(q) * (1.0 - c);
        Some((cutoff_term, radial_term))
    })?;
    let mut report = BlendReport {
        passed: true,
        tier: f.tier(),
        points_checked: 0,
        min_cutoff_term: f64::INFINITY,
        min_radial_term: f64::INFINITY,
        min_derivative: f64::INFINITY,
        witness: None,
        input_bounds: verify_radial_bounds(f, r_axis, delta, grid, None)?,
    };
    let mut failing_term = "";
    for (p, v) in values {
        let Some((a, b)) = v else { continue };
        report.points_checked += 1;
        report.min_cutoff_term = report.min_cutoff_term.min(a);
        report.min_radial_term = report.min_radial_term.min(b);
        let d = a + b;
        if d < report.min_derivative || d.is_nan() {
            report.min_derivative = d;
            if !(d > 0.0) {
                report.passed = false;
                report.witness = Some(p);
                failing_term = if !(a >= 0.0) { "cut-off term chi'(delta r^2 - f)" } else { "radial term 2 r delta chi + d_r f (1 - chi)" };
            }
        }
    }
    if !report.passed {
        return Err(Error::NotCertified(format!(
            "d_r of the blend is {:e} at {:?}; nonpositive {}",
            report.min_derivative,
            report.witness.as_deref().unwrap_or(&[]),
            failing_term
        )));
    }
    Ok(Interpolation {
        field: ScalarField::new(chart.clone(), blended),
        chi: ScalarField::new(chart.clone(), chi),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{Axis, AxisSamples, Chart};
    use std::sync::Arc;

    fn radial() -> Arc<Chart> {
        Arc::new(Chart::new(vec![Axis::bounded("r", 0.0, 1.0)]).unwrap())
    }

    #[test]
    fn fixed_point() {
        let c = radial();
        let f = ScalarField::new(c.clone(), Expr::var(0).powi(2).scale(0.4));
        let grid = Grid { axes: vec![AxisSamples::Count { n: 1001 }] };
        let out = interpolate_to_standard(&f, 0, 0.4, 1.0, &grid).unwrap();
        for k in 0..=1000 {
            let r = k as f64 / 1000.0;
            assert!((out.field.expr().eval(&[r]) - 0.4 * r * r).abs() < 1e-16);
        }
    }

    #[test]
    fn decreasing_input_is_reported() {
        let c = radial();
        let f = ScalarField::new(c.clone(), Expr::var(0).scale(-1.0));
        let grid = Grid { axes: vec![AxisSamples::Count { n: 101 }] };
        let err = interpolate_to_standard(&f, 0, 0.4, 1.0, &grid).unwrap_err();
        assert!(matches!(err, Error::NotCertified(m) if m.contains("radial term") || m.contains("cut-off term")));
    }
}
