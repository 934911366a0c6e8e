use std::sync::Arc;

use crate::error::{Error, Result};
use crate::foliated::{finish, FieldSolution, LeafContactForm};
use crate::forms::{Expr, Grid, ScalarField, VectorField};

/// Pointwise solve of `alpha_L(X) = H` and `d alpha_L(X, v) + dH(v) = 0`
/// for `v` in `ker alpha_L`, written as `i_X d alpha_L + dH = mu alpha_L`.
fn lift_at(leaf: &LeafContactForm, dh: &[Expr], h: &Expr, d_alpha: &crate::forms::DifferentialForm, q: &[f64]) -> Result<FieldSolution> {
    let n = q.len();
    let a = leaf.alpha().covector_at(q);
    let m = d_alpha.matrix_at(q);
    let mut rows = Vec::with_capacity(n + 1);
    let mut rhs = Vec::with_capacity(n + 1);
    let mut r0 = a.clone();
    r0.push(0.0);
    rows.push(r0);
    rhs.push(h.eval(q));
    for j in 0..n {
        let mut row: Vec<f64> = (0..n).map(|i| m[i][j]).collect();
        row.push(-a[j]);
        rows.push(row);
        rhs.push(-dh[j].eval(q));
    }
    finish(q.to_vec(), rows, rhs, n)
}

/// Lift of `H` to the leaf: the field `X~` with `d/dt + X~` spanning the
/// connection of the mapping-torus model. Rank is checked on the default
/// grid before the field is returned.
pub fn mapping_torus_lift(leaf: &LeafContactForm, h: &ScalarField) -> Result<VectorField> {
    let chart = leaf.chart().clone();
    if **h.chart() != *chart {
        return Err(Error::ChartMismatch("H must live on the leaf chart".into()));
    }
    let dh: Vec<Expr> = (0..chart.dim()).map(|i| h.expr().diff(i)).collect();
    let d_alpha = leaf.alpha().d();
    for p in Grid::default_for(&chart).points(&chart)? {
        lift_at(leaf, &dh, h.expr(), &d_alpha, &chart.reduce(&p))?;
    }
    let leaf = Arc::new(leaf.clone());
    let hx = h.expr().clone();
    let n = chart.dim();
    Ok(VectorField::from_fn(chart, "lift", move |x| {
        let q = leaf.chart().reduce(x);
        lift_at(&leaf, &dh, &hx, &d_alpha, &q)
            .map(|s| s.vector)
            .unwrap_or_else(|_| vec![f64::NAN; n])
    }))
}
