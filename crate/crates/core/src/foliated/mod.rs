//! Foliated contact and symplectic structures as associated pairs.

mod leaf;
mod pair;
mod solve;
mod verify;

pub use leaf::LeafContactForm;
pub use pair::{FoliatedContactPair, SymplecticFoliationPair};
pub use solve::{
    frame_determinant, solve_fields, solve_reeb_field, solve_symplectic_transverse, solve_transverse_field,
    solved_field, symplectic_transverse_field, FieldKind, FieldSample, FieldSolution, FieldSolveReport,
};
pub(crate) use solve::{finish, solve_arrays, solve_reduced};
pub use verify::{
    check_frobenius, check_frobenius_with, verify_contact_foliation, verify_contact_foliation_with,
    verify_parallel_identity, verify_parallel_identity_with, verify_radial_bounds, verify_symplectic_foliation,
    verify_symplectic_foliation_with, verify_symplectic_lie, verify_symplectic_lie_with,
    ContactReport, FrobeniusReport, LieReport, ParallelReport, RadialBoundsReport, SymplecticReport, TimeWindow,
};

use rayon::prelude::*;

use crate::error::Result;
use crate::forms::{AxisKind, Chart, Grid};

/// Evaluate `f` at every grid point (reduced), in grid order.
pub(crate) fn sweep<T, F>(chart: &Chart, grid: &Grid, f: F) -> Result<Vec<(Vec<f64>, T)>>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    let pts = grid.points(chart)?;
    Ok(pts
        .into_par_iter()
        .map(|p| {
            let q = chart.reduce(&p);
            let v = f(&q);
            (p, v)
        })
        .collect())
}

/// Derivative of `f` along axis `j` at `q`: central where the stencil fits
/// inside bounded axes, one-sided otherwise.
pub(crate) fn axis_derivative<F: Fn(&[f64]) -> f64>(chart: &Chart, q: &[f64], j: usize, h: f64, f: F) -> f64 {
    axis_derivative_vec(chart, q, j, h, |x| vec![f(x)])[0]
}

/// Componentwise [`axis_derivative`] of a vector-valued function.
pub(crate) fn axis_derivative_vec<F: Fn(&[f64]) -> Vec<f64>>(chart: &Chart, q: &[f64], j: usize, h: f64, f: F) -> Vec<f64> {
    let (fits_lo, fits_hi) = match chart.axes()[j].kind {
        AxisKind::Periodic { .. } => (true, true),
        AxisKind::Bounded { lo, hi } => (q[j] - h >= lo, q[j] + h <= hi),
    };
    let mut y = q.to_vec();
    let mut at = |x: f64| {
        y[j] = x;
        f(&y)
    };
    let diff = |u: Vec<f64>, v: Vec<f64>, w: f64| u.iter().zip(&v).map(|(a, b)| (a - b) / w).collect();
    match (fits_lo, fits_hi) {
        (true, true) => diff(at(q[j] + h), at(q[j] - h), 2.0 * h),
        (false, true) => diff(at(q[j] + h), at(q[j]), h),
        (true, false) => diff(at(q[j]), at(q[j] - h), h),
        (false, false) => vec![0.0; f(q).len()],
    }
}
