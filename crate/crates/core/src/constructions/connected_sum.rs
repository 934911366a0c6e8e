//! Gluing two tubular neighbourhoods of a codimension-2 divisor along the
//! region `S x (-eps^2, eps^2) x S^1`.

use std::f64::consts::TAU;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::foliated::{verify_contact_foliation, ContactReport, FoliatedContactPair};
use crate::forms::{Axis, AxisSamples, Chart, ChartMap, DifferentialForm, Expr, Grid};
use crate::tolerance::{DEFAULT_GRID, EXACT_TOL, R_MIN};

/// Divisor `S`: a 2-torus `(p1, p2)` with `beta_S = dp1` and
/// `alpha_S = dp2 + 0.5 sin(2 pi p1) dp1`, nonvanishing on the 1-dimensional
/// leaves of `S`.
fn divisor_alpha(dim: usize) -> Vec<Expr> {
    let mut c = vec![Expr::zero(); dim];
    c[0] = Expr::var(0).scale(TAU).sin().scale(0.5);
    c[1] = Expr::one();
    c
}

fn divisor_axes() -> Vec<Axis> {
    vec![Axis::periodic("p1", 1.0), Axis::periodic("p2", 1.0)]
}

/// Orientation sign making `alpha ^ d alpha ^ beta` positive on both the
/// sides and the gluing region.
const ORIENTATION: f64 = -1.0;

/// Side model `(beta_S, alpha_S + r^2 dtheta)` on `S x D^2_{2 eps}`,
/// chart `(p1, p2, r, theta)`.
pub fn divisor_local_model(epsilon: f64) -> Result<FoliatedContactPair> {
    if !(epsilon > R_MIN && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon {epsilon} outside (r_min, 1)")));
    }
    let mut axes = divisor_axes();
    axes.push(Axis::bounded("r", R_MIN, 2.0 * epsilon));
    axes.push(Axis::periodic("theta", TAU));
    let chart = Arc::new(Chart::new(axes)?);
    let mut c = divisor_alpha(4);
    c[3] = Expr::var(2).powi(2);
    let alpha = DifferentialForm::one_form(chart.clone(), c)?;
    let beta = DifferentialForm::coordinate(chart.clone(), 0);
    FoliatedContactPair::new(beta, alpha, DifferentialForm::volume(chart.clone(), ORIENTATION))?
        .certify(&Grid::default_for(&chart))
}

/// Gluing-region chart `(p1, p2, t, theta)` with `t` in `[lo, hi]`.
fn region_chart(lo: f64, hi: f64) -> Result<Arc<Chart>> {
    let mut axes = divisor_axes();
    axes.push(Axis::bounded("t", lo, hi));
    axes.push(Axis::periodic("theta", TAU));
    Ok(Arc::new(Chart::new(axes)?))
}

fn region_alpha(chart: Arc<Chart>) -> Result<DifferentialForm> {
    let mut c = divisor_alpha(4);
    c[3] = Expr::var(2);
    DifferentialForm::one_form(chart, c)
}

#[derive(Debug, Clone, Serialize)]
pub struct GluingReport {
    pub epsilon: f64,
    pub grid_points: usize,
    /// Max over grid and coordinate frames of `|F0^* side - region|`, `t > 0`.
    pub f0_residual: f64,
    /// Same for `F1` (`r = sqrt(-t)`, `theta -> -theta`), `t < 0`.
    pub f1_residual: f64,
    /// Max deviation of each side from the local model.
    pub side_deviation: [f64; 2],
    pub region_contact: ContactReport,
}

#[derive(Debug, Clone)]
pub struct ConnectedSum {
    pub region: FoliatedContactPair,
    pub f0: ChartMap,
    pub f1: ChartMap,
    pub report: GluingReport,
}

fn side_deviation(side: &FoliatedContactPair, model: &FoliatedContactPair) -> Result<f64> {
    if side.chart() != model.chart() && **side.chart() != **model.chart() {
        return Err(Error::ChartMismatch("side chart differs from the divisor local model".into()));
    }
    let grid = Grid::default_for(model.chart());
    let mut worst = 0.0f64;
    for p in grid.points(model.chart())? {
        let q = model.chart().reduce(&p);
        for (a, b) in [(side.alpha(), model.alpha()), (side.beta(), model.beta())] {
            let (x, y) = (a.covector_at(&q), b.covector_at(&q));
            for (u, v) in x.iter().zip(&y) {
                worst = worst.max((u - v).abs());
            }
        }
    }
    Ok(worst)
}

fn frame_residual(pulled: &DifferentialForm, target: &DifferentialForm, grid: &Grid) -> Result<(f64, usize)> {
    let chart = pulled.chart();
    let pts = grid.points(chart)?;
    let mut worst = 0.0f64;
    for p in &pts {
        let q = chart.reduce(p);
        let (a, b) = (pulled.covector_at(&q), target.covector_at(&q));
        for (u, v) in a.iter().zip(&b) {
            worst = worst.max((u - v).abs());
        }
    }
    Ok((worst, pts.len()))
}

/// Glue two copies of the side model along `S x (-eps^2, eps^2) x S^1`.
pub fn divisor_connected_sum(side0: &FoliatedContactPair, side1: &FoliatedContactPair, epsilon: f64) -> Result<ConnectedSum> {
    let model = divisor_local_model(epsilon)?;
    let dev0 = side_deviation(side0, &model)?;
    let dev1 = side_deviation(side1, &model)?;
    for (dev, side) in [(dev0, side0), (dev1, side1)] {
        if dev > EXACT_TOL {
            return Err(Error::ModelMismatch {
                deviation: dev,
                point: side.chart().axes().iter().map(|a| a.range().0).collect(),
            });
        }
    }
    let e2 = epsilon * epsilon;
    let n = DEFAULT_GRID;
    let side_target = side0.chart().clone();

    // t > 0: F0(p, t, theta) = (p, sqrt t, theta)
    let pos = region_chart(e2 / n as f64, e2)?;
    let (p1, p2, t, th) = (Expr::var(0), Expr::var(1), Expr::var(2), Expr::var(3));
    let f0 = ChartMap::new(pos.clone(), side_target.clone(), vec![p1.clone(), p2.clone(), t.sqrt(), th.clone()])?;
    let pulled0 = f0.pullback(side0.alpha())?;
    let grid_pos = Grid::uniform(4, n).with(2, AxisSamples::Range { lo: e2 / n as f64, hi: e2, n });
    let (f0_residual, pts0) = frame_residual(&pulled0, &region_alpha(pos)?, &grid_pos)?;

    // t < 0: F1(p, t, theta) = (p, sqrt(-t), -theta)
    let neg = region_chart(-e2, -e2 / n as f64)?;
    let f1 = ChartMap::new(neg.clone(), side_target, vec![p1, p2, t.neg().sqrt(), th.neg()])?;
    let pulled1 = f1.pullback(side1.alpha())?;
    let grid_neg = Grid::uniform(4, n).with(2, AxisSamples::Range { lo: -e2, hi: -e2 / n as f64, n });
    let (f1_residual, pts1) = frame_residual(&pulled1, &region_alpha(neg)?, &grid_neg)?;

    let chart = region_chart(-e2, e2)?;
    let region = FoliatedContactPair::new(
        DifferentialForm::coordinate(chart.clone(), 0),
        region_alpha(chart.clone())?,
        DifferentialForm::volume(chart.clone(), ORIENTATION),
    )?;
    let region_contact = verify_contact_foliation(&region, &Grid::default_for(&chart))?;
    if !region_contact.passed {
        return Err(Error::NotCertified(region_contact.summary()));
    }
    let region = region.certify(&Grid::default_for(&chart))?;
    Ok(ConnectedSum {
        region,
        f0,
        f1,
        report: GluingReport {
            epsilon,
            grid_points: pts0 + pts1,
            f0_residual,
            f1_residual,
            side_deviation: [dev0, dev1],
            region_contact,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn side_model_is_certified_with_ratio_two_r() {
        let side = divisor_local_model(0.5).unwrap();
        let rep = side.certificate().unwrap();
        assert!((rep.min_ratio - 2.0 * R_MIN).abs() < 1e-15);
        assert!((rep.max_ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gluing_maps_pull_back_the_region_form() {
        let side = divisor_local_model(0.3).unwrap();
        let sum = divisor_connected_sum(&side, &side, 0.3).unwrap();
        assert!(sum.report.f0_residual < 1e-12, "{}", sum.report.f0_residual);
        assert!(sum.report.f1_residual < 1e-12, "{}", sum.report.f1_residual);
        assert!(sum.region.is_certified());
        assert_eq!(sum.report.side_deviation, [0.0, 0.0]);
    }

    #[test]
    fn mismatched_side_is_rejected() {
        let good = divisor_local_model(0.5).unwrap();
        let chart = good.chart().clone();
        let mut c = divisor_alpha(4);
        c[3] = Expr::var(2).powi(2).scale(1.5);
        let bad = FoliatedContactPair::new(
            good.beta().clone(),
            DifferentialForm::one_form(chart.clone(), c).unwrap(),
            good.orientation().clone(),
        )
        .unwrap();
        assert!(matches!(divisor_connected_sum(&good, &bad, 0.5), Err(Error::ModelMismatch { .. })));
    }
}
