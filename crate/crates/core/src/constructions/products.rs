//! Contactization and symplectization: one new axis, appended last.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::foliated::{FoliatedContactPair, SymplecticFoliationPair};
use crate::forms::{Axis, Chart, DifferentialForm, Expr, Grid};

fn fresh_name(chart: &Chart, base: &str) -> String {
    (0..)
        .map(|k| if k == 0 { base.to_string() } else { format!("{base}{k}") })
        .find(|c| chart.axis_index(c).is_none())
        .expect("unbounded search")
}

fn extend(chart: &Arc<Chart>, name: &str, lo: f64, hi: f64) -> Result<(Arc<Chart>, Vec<usize>)> {
    let mut axes = chart.axes().to_vec();
    axes.push(Axis::bounded(&fresh_name(chart, name), lo, hi));
    let map = (0..chart.dim()).collect();
    Ok((Arc::new(Chart::new(axes)?), map))
}

/// `(beta, lambda - dz)` on `chart x R_z`, given a foliation `beta` whose
/// leafwise symplectic extension is `d lambda`. The base pair
/// `(beta, d lambda)` must certify; so must the result.
pub fn contactize(beta: &DifferentialForm, lambda: &DifferentialForm) -> Result<FoliatedContactPair> {
    let base = SymplecticFoliationPair::new(beta.clone(), lambda.d())?
        .certify(&Grid::default_for(beta.chart()))
        .map_err(|e| Error::NotCertified(format!("base is not a strong symplectic foliation: {e}")))?;
    let chart = base.chart();
    let (ext, map) = extend(chart, "z", -1.0, 1.0)?;
    let n = chart.dim();
    let beta_ext = beta.embed(ext.clone(), &map);
    let dz = DifferentialForm::coordinate(ext.clone(), n);
    let alpha = lambda.embed(ext.clone(), &map).sub(&dz)?;
    // alpha ^ (d lambda)^k ^ beta = -dz ^ omega^k ^ beta; fix the sign of the
    // reference volume from the base chart's centre
    let centre: Vec<f64> = chart
        .axes()
        .iter()
        .map(|a| {
            let (lo, hi) = a.range();
            0.5 * (lo + hi)
        })
        .collect();
    let mut probe = centre.clone();
    probe.push(0.0);
    let top = dz
        .neg()
        .wedge(&base.volume_top().embed(ext.clone(), &map))?
        .top_at(&probe);
    if top == 0.0 {
        return Err(Error::Degenerate {
            point: centre,
            reason: "omega^n ^ beta vanishes".into(),
        });
    }
    let orientation = DifferentialForm::volume(ext.clone(), top.signum());
    FoliatedContactPair::new(beta_ext, alpha, orientation)?.certify(&Grid::default_for(&ext))
}

/// `(beta, d(e^s alpha))` on `chart x R_s`, with the 2-form assembled as
/// `e^s (ds ^ alpha + d alpha)`.
pub fn symplectize(pair: &FoliatedContactPair) -> Result<SymplecticFoliationPair> {
    if !pair.is_certified() {
        return Err(Error::NotCertified("symplectize needs a certified contact pair".into()));
    }
    let chart = pair.chart();
    let (ext, map) = extend(chart, "s", -1.0, 1.0)?;
    let n = chart.dim();
    let es = Expr::var(n).exp();
    let alpha = pair.alpha().embed(ext.clone(), &map);
    let ds = DifferentialForm::coordinate(ext.clone(), n);
    let omega = ds.wedge(&alpha)?.add(&pair.d_alpha().embed(ext.clone(), &map))?.scale(&es);
    let beta = pair.beta().embed(ext.clone(), &map);
    SymplecticFoliationPair::new(beta, omega)?.certify(&Grid::default_for(&ext))
}
