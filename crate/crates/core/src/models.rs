//! Built-in fixtures. Every constructor certifies its output on the default
//! grid before returning it.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::foliated::{FoliatedContactPair, LeafContactForm, SymplecticFoliationPair};
use crate::forms::{Axis, Chart, DifferentialForm, Expr, Grid, ScalarField};
use crate::tolerance::R_MIN;

const TAU: f64 = 2.0 * PI;

/// Outer radius of the standard local model chart.
pub const LOCAL_MODEL_RADIUS: f64 = 2.0;

/// Outer radius of the overtwisted model chart.
pub const OVERTWISTED_RADIUS: f64 = 3.0 * FRAC_PI_2;

/// Name, parameters and chart of a built-in model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelDescriptor {
    pub name: String,
    pub parameters: BTreeMap<String, f64>,
    pub chart: Chart,
    pub provenance: String,
}

/// T^4 chart `(t, x, y, z)`, period 1 on every axis.
pub fn t4_chart() -> Arc<Chart> {
    Arc::new(
        Chart::new(vec![
            Axis::periodic("t", 1.0),
            Axis::periodic("x", 1.0),
            Axis::periodic("y", 1.0),
            Axis::periodic("z", 1.0),
        ])
        .expect("static chart"),
    )
}

/// `beta = p dx + q dy + r dz - dt`, `alpha = sin(2 pi z) dx + cos(2 pi z) dy`.
pub fn t4_model(p: f64, q: f64, r: f64) -> Result<FoliatedContactPair> {
    let chart = t4_chart();
    let z = Expr::var(3).scale(TAU);
    let beta = DifferentialForm::one_form(
        chart.clone(),
        vec![Expr::constant(-1.0), Expr::constant(p), Expr::constant(q), Expr::constant(r)],
    )?;
    let alpha = DifferentialForm::one_form(chart.clone(), vec![Expr::zero(), z.sin(), z.cos(), Expr::zero()])?;
    let orientation = DifferentialForm::volume(chart.clone(), 1.0);
    FoliatedContactPair::new(beta, alpha, orientation)?.certify(&Grid::default_for(&chart))
}

pub fn t4_descriptor(p: f64, q: f64, r: f64) -> ModelDescriptor {
    ModelDescriptor {
        name: "t4".into(),
        parameters: BTreeMap::from([("p".into(), p), ("q".into(), q), ("r".into(), r)]),
        chart: (*t4_chart()).clone(),
        provenance: "linear foliation of the 4-torus with a z-rotating leafwise contact form".into(),
    }
}

/// `R x C^n` with `beta = dt`, `omega = sum dx_i ^ dy_i`; chart `(t, x1, y1, ...)`.
pub fn standard_symplectic_foliation(n: usize) -> Result<SymplecticFoliationPair> {
    if !(1..=2).contains(&n) {
        return Err(Error::InvalidParameter(format!("n = {n} outside 1..=2")));
    }
    let mut axes = vec![Axis::bounded("t", -1.0, 1.0)];
    for i in 1..=n {
        axes.push(Axis::bounded(&format!("x{i}"), -1.0, 1.0));
        axes.push(Axis::bounded(&format!("y{i}"), -1.0, 1.0));
    }
    let chart = Arc::new(Chart::new(axes)?);
    let beta = DifferentialForm::coordinate(chart.clone(), 0);
    let terms = (0..n).map(|i| (vec![1 + 2 * i, 2 + 2 * i], Expr::one())).collect();
    let omega = DifferentialForm::from_terms(chart.clone(), 2, terms)?;
    SymplecticFoliationPair::new(beta, omega)?.certify(&Grid::default_for(&chart))
}

/// Leaf chart `(r, theta, z)` with `r` in `[R_MIN, r_max]`.
pub fn polar_leaf_chart(r_max: f64) -> Result<Arc<Chart>> {
    Ok(Arc::new(Chart::new(vec![
        Axis::bounded("r", R_MIN, r_max),
        Axis::periodic("theta", TAU),
        Axis::bounded("z", -1.0, 1.0),
    ])?))
}

/// `cos(r) dz + r sin(r) dtheta` on `r <= 3 pi / 2`.
pub fn overtwisted_model() -> Result<LeafContactForm> {
    let chart = polar_leaf_chart(OVERTWISTED_RADIUS)?;
    let r = Expr::var(0);
    let alpha = DifferentialForm::one_form(chart.clone(), vec![Expr::zero(), r.mul(&r.sin()), r.cos()])?;
    let leaf = LeafContactForm::new(alpha, DifferentialForm::volume(chart.clone(), 1.0))?;
    let report = leaf.verify(&Grid::default_for(&chart))?;
    if !report.passed {
        return Err(Error::NotCertified(report.summary()));
    }
    Ok(leaf)
}

/// `I x D^3` chart `(r, theta, z, t)`.
pub fn local_chart(r_max: f64) -> Result<Arc<Chart>> {
    Ok(Arc::new(Chart::new(vec![
        Axis::bounded("r", R_MIN, r_max),
        Axis::periodic("theta", TAU),
        Axis::bounded("z", -1.0, 1.0),
        Axis::bounded("t", 0.0, 1.0),
    ])?))
}

/// The untwisted leaf form `dz + r^2 dtheta` on a chart ordered `(r, theta, z, ...)`.
pub fn standard_alpha(chart: Arc<Chart>) -> Result<DifferentialForm> {
    let mut coeffs = vec![Expr::zero(); chart.dim()];
    coeffs[1] = Expr::var(0).powi(2);
    coeffs[2] = Expr::one();
    DifferentialForm::one_form(chart, coeffs)
}

/// `beta = dt`, `alpha = dz + r^2 dtheta` on `I x D^3`.
pub fn standard_local_model() -> Result<FoliatedContactPair> {
    standard_local_model_with_radius(LOCAL_MODEL_RADIUS)
}

pub fn standard_local_model_with_radius(r_max: f64) -> Result<FoliatedContactPair> {
    if !(r_max > R_MIN) {
        return Err(Error::InvalidParameter(format!("radius {r_max} too small")));
    }
    let chart = local_chart(r_max)?;
    let beta = DifferentialForm::coordinate(chart.clone(), 3);
    let alpha = standard_alpha(chart.clone())?;
    FoliatedContactPair::new(beta, alpha, DifferentialForm::volume(chart.clone(), 1.0))?
        .certify(&Grid::default_for(&chart))
}

/// Leaf chart `(x, y, z)` on `[-1, 1]^3`.
pub fn box_leaf_chart() -> Arc<Chart> {
    Arc::new(
        Chart::new(vec![
            Axis::bounded("x", -1.0, 1.0),
            Axis::bounded("y", -1.0, 1.0),
            Axis::bounded("z", -1.0, 1.0),
        ])
        .expect("static chart"),
    )
}

/// `dz + x dy` on the box leaf chart.
pub fn mapping_torus_leaf() -> Result<LeafContactForm> {
    let chart = box_leaf_chart();
    let alpha = DifferentialForm::one_form(chart.clone(), vec![Expr::zero(), Expr::var(0), Expr::one()])?;
    let leaf = LeafContactForm::new(alpha, DifferentialForm::volume(chart.clone(), 1.0))?;
    let report = leaf.verify(&Grid::default_for(&chart))?;
    if !report.passed {
        return Err(Error::NotCertified(report.summary()));
    }
    Ok(leaf)
}

/// Chart `(x, y, z, t)` with `beta = dt` and `alpha = dz + x dy - H dt`, so
/// that `ker alpha` contains `d/dt + X` for any `X` with `alpha_L(X) = H`.
pub fn mapping_torus_model(h: &ScalarField) -> Result<FoliatedContactPair> {
    let leaf = mapping_torus_leaf()?;
    if **h.chart() != **leaf.chart() {
        return Err(Error::ChartMismatch("H must live on the (x, y, z) leaf chart".into()));
    }
    let mut axes = leaf.chart().axes().to_vec();
    axes.push(Axis::bounded("t", 0.0, 1.0));
    let chart = Arc::new(Chart::new(axes)?);
    let beta = DifferentialForm::coordinate(chart.clone(), 3);
    let alpha_l = leaf.alpha().embed(chart.clone(), &[0, 1, 2]);
    let h_dt = DifferentialForm::coordinate(chart.clone(), 3).scale(h.expr());
    let alpha = alpha_l.sub(&h_dt)?;
    FoliatedContactPair::new(beta, alpha, DifferentialForm::volume(chart.clone(), 1.0))?
        .certify(&Grid::default_for(&chart))
}
