//! Grid verifiers. Every report records the tolerance tier it was judged
//! against and, on failure, a witness grid point.

use serde::Serialize;

use super::pair::{FoliatedContactPair, SymplecticFoliationPair};
use super::solve::{solve_reduced, symplectic_transverse_reduced, FieldKind};
use super::{axis_derivative, axis_derivative_vec, sweep};
use crate::error::{Error, Result};
use crate::forms::{DifferentialForm, Grid, ScalarField};
use crate::tolerance::{Tier, Tolerances, FD_STEP};

#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusReport {
    pub passed: bool,
    pub tier: Tier,
    pub tolerance: f64,
    pub grid_points: usize,
    /// Largest |beta ^ d beta| over coordinate frames.
    pub max_abs: f64,
    pub witness: Option<Vec<f64>>,
}

/// Integrability of `ker beta`: `beta ^ d beta = 0` on the grid.
pub fn check_frobenius(beta: &DifferentialForm, grid: &Grid) -> Result<FrobeniusReport> {
    check_frobenius_with(beta, grid, &Tolerances::default())
}

pub fn check_frobenius_with(beta: &DifferentialForm, grid: &Grid, tol: &Tolerances) -> Result<FrobeniusReport> {
    if beta.degree() != 1 {
        return Err(Error::InvalidDegree {
            op: "frobenius check",
            degree: beta.degree(),
            dim: beta.chart().dim(),
        });
    }
    let chart = beta.chart();
    let bdb = if chart.dim() >= 3 {
        Some(beta.wedge(&beta.d())?)
    } else {
        None
    };
    let tier = beta.tier();
    let tolerance = tol.for_tier(tier);
    let values = sweep(chart, grid, |q| {
        let norm = beta.max_abs_at(q);
        let v = bdb.as_ref().map_or(0.0, |f| f.max_abs_at(q));
        (norm, v)
    })?;
    let mut max_abs = 0.0f64;
    let mut witness = None;
    for (p, (norm, v)) in &values {
        if *norm == 0.0 {
            return Err(Error::Degenerate {
                point: p.clone(),
                reason: "beta vanishes".into(),
            });
        }
        if *v > max_abs {
            max_abs = *v;
            if *v > tolerance {
                witness = Some(p.clone());
            }
        }
    }
    Ok(FrobeniusReport {
        passed: max_abs <= tolerance,
        tier,
        tolerance,
        grid_points: values.len(),
        max_abs,
        witness,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContactReport {
    pub passed: bool,
    pub tier: Tier,
    pub positivity_margin: f64,
    pub grid_points: usize,
    /// Ratio of `alpha ^ (d alpha)^n ^ beta` to the orientation form.
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub min_beta: Option<f64>,
    pub min_alpha_wedge_beta: Option<f64>,
    pub witness: Option<Vec<f64>>,
    pub reason: Option<String>,
}

impl ContactReport {
    pub fn summary(&self) -> String {
        match (&self.reason, &self.witness) {
            (Some(r), Some(w)) => format!("{r} at {w:?} (min ratio {:e})", self.min_ratio),
            _ => format!("min ratio {:e}", self.min_ratio),
        }
    }
}

pub fn verify_contact_foliation(pair: &FoliatedContactPair, grid: &Grid) -> Result<ContactReport> {
    verify_contact_foliation_with(pair, grid, &Tolerances::default())
}

/// Positivity of `alpha ^ (d alpha)^n ^ beta` against the orientation form.
pub fn verify_contact_foliation_with(
    pair: &FoliatedContactPair,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<ContactReport> {
    let ab = pair.alpha().wedge(pair.beta())?;
    let values = sweep(pair.chart(), grid, |q| {
        let top = pair.contact_top().top_at(q);
        let orient = pair.orientation().top_at(q);
        (top / orient, pair.beta().max_abs_at(q), ab.max_abs_at(q))
    })?;
    let mut report = ContactReport {
        passed: true,
        tier: pair.tier(),
        positivity_margin: tol.positivity,
        grid_points: values.len(),
        min_ratio: f64::INFINITY,
        max_ratio: f64::NEG_INFINITY,
        min_beta: None,
        min_alpha_wedge_beta: None,
        witness: None,
        reason: None,
    };
    let mut min_beta = f64::INFINITY;
    let mut min_ab = f64::INFINITY;
    for (p, (ratio, b, ab)) in values {
        min_beta = min_beta.min(b);
        min_ab = min_ab.min(ab);
        report.max_ratio = report.max_ratio.max(ratio);
        let fail = if b == 0.0 {
            Some("beta vanishes")
        } else if ab == 0.0 {
            Some("alpha ^ beta vanishes")
        } else if !(ratio > tol.positivity) {
            Some("contact condition fails")
        } else {
            None
        };
        if ratio < report.min_ratio || ratio.is_nan() {
            report.min_ratio = ratio;
        }
        if let Some(reason) = fail {
            if report.passed {
                report.passed = false;
                report.witness = Some(p);
                report.reason = Some(reason.into());
            }
        }
    }
    report.min_beta = Some(min_beta);
    report.min_alpha_wedge_beta = Some(min_ab);
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct ParallelReport {
    pub passed: bool,
    pub tier: Tier,
    pub tolerance: f64,
    pub grid_points: usize,
    /// Max over points and frame vectors of `|(L_T a - da(T,R) a)(e_j)|`.
    pub max_residual: f64,
    /// Max of `|L_T a (e_j)|`, to tell a trivial identity from a real one.
    pub max_lie: f64,
    /// Max of `|da(T,R)|`.
    pub max_factor: f64,
    pub witness: Option<Vec<f64>>,
}

/// `L_T alpha = d alpha(T, R) alpha` on the grid, with `L_T` through the
/// Cartan formula and `d(alpha(T))` by central differences.
pub fn verify_parallel_identity(pair: &FoliatedContactPair, grid: &Grid) -> Result<ParallelReport> {
    verify_parallel_identity_with(pair, grid, &Tolerances::default())
}

pub fn verify_parallel_identity_with(pair: &FoliatedContactPair, grid: &Grid, tol: &Tolerances) -> Result<ParallelReport> {
    let chart = pair.chart();
    let n = chart.dim();
    let alpha_of_t = |x: &[f64]| -> f64 {
        let q = chart.reduce(x);
        match solve_reduced(pair, &q, FieldKind::Transverse) {
            Ok(s) => pair
                .alpha()
                .covector_at(&q)
                .iter()
                .zip(&s.vector)
                .map(|(a, t)| a * t)
                .sum(),
            Err(_) => f64::NAN,
        }
    };
    let values = sweep(chart, grid, |q| -> Result<(f64, f64, f64)> {
        let t = solve_reduced(pair, q, FieldKind::Transverse)?;
        let r = solve_reduced(pair, q, FieldKind::Reeb)?;
        let m = pair.d_alpha().matrix_at(q);
        let a = pair.alpha().covector_at(q);
        let factor: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| t.vector[i] * m[i][j] * r.vector[j])
            .sum();
        let mut worst = 0.0f64;
        let mut lie_max = 0.0f64;
        for j in 0..n {
            let i_t_da: f64 = (0..n).map(|i| t.vector[i] * m[i][j]).sum();
            let d_at = axis_derivative(chart, q, j, FD_STEP, alpha_of_t);
            let lie = i_t_da + d_at;
            lie_max = lie_max.max(lie.abs());
            worst = worst.max((lie - factor * a[j]).abs());
        }
        Ok((worst, lie_max, factor.abs()))
    })?;
    let tolerance = tol.fd;
    let mut report = ParallelReport {
        passed: true,
        tier: Tier::Fd,
        tolerance,
        grid_points: values.len(),
        max_residual: 0.0,
        max_lie: 0.0,
        max_factor: 0.0,
        witness: None,
    };
    for (p, v) in values {
        let (worst, lie, factor) = v?;
        report.max_lie = report.max_lie.max(lie);
        report.max_factor = report.max_factor.max(factor);
        if worst > report.max_residual || worst.is_nan() {
            report.max_residual = worst;
            if !(worst <= tolerance) {
                report.passed = false;
                report.witness = Some(p);
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct SymplecticReport {
    pub passed: bool,
    pub tier: Tier,
    pub closed_tolerance: f64,
    pub grid_points: usize,
    /// Largest |d omega| component.
    pub max_d_omega: f64,
    /// Smallest |omega^n ^ beta| coefficient.
    pub min_volume: f64,
    pub witness: Option<Vec<f64>>,
    pub reason: Option<String>,
}

impl SymplecticReport {
    pub fn summary(&self) -> String {
        match (&self.reason, &self.witness) {
            (Some(r), Some(w)) => format!("{r} at {w:?}"),
            _ => format!("max |d omega| {:e}, min volume {:e}", self.max_d_omega, self.min_volume),
        }
    }
}

pub fn verify_symplectic_foliation(pair: &SymplecticFoliationPair, grid: &Grid) -> Result<SymplecticReport> {
    verify_symplectic_foliation_with(pair, grid, &Tolerances::default())
}

/// Closedness of the extension and leafwise nondegeneracy.
pub fn verify_symplectic_foliation_with(
    pair: &SymplecticFoliationPair,
    grid: &Grid,
    tol: &Tolerances,
) -> Result<SymplecticReport> {
    let tier = pair.tier();
    let closed_tolerance = tol.for_tier(tier);
    let values = sweep(pair.chart(), grid, |q| {
        (pair.d_omega().max_abs_at(q), pair.volume_top().top_at(q).abs())
    })?;
    let mut report = SymplecticReport {
        passed: true,
        tier,
        closed_tolerance,
        grid_points: values.len(),
        max_d_omega: 0.0,
        min_volume: f64::INFINITY,
        witness: None,
        reason: None,
    };
    for (p, (d, vol)) in values {
        report.max_d_omega = report.max_d_omega.max(d);
        report.min_volume = report.min_volume.min(vol);
        let fail = if !(d <= closed_tolerance) {
            Some("omega is not closed")
        } else if !(vol > tol.positivity) {
            Some("omega is degenerate on the leaf")
        } else {
            None
        };
        if let Some(reason) = fail {
            if report.passed {
                report.passed = false;
                report.witness = Some(p);
                report.reason = Some(reason.into());
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct LieReport {
    pub passed: bool,
    pub tier: Tier,
    pub tolerance: f64,
    pub grid_points: usize,
    /// Largest |L_T omega (e_a, e_b)|.
    pub max_residual: f64,
    pub witness: Option<Vec<f64>>,
}

/// `L_T omega = 0` for the symplectic transverse field.
pub fn verify_symplectic_lie(pair: &SymplecticFoliationPair, grid: &Grid) -> Result<LieReport> {
    verify_symplectic_lie_with(pair, grid, &Tolerances::default())
}

pub fn verify_symplectic_lie_with(pair: &SymplecticFoliationPair, grid: &Grid, tol: &Tolerances) -> Result<LieReport> {
    let chart = pair.chart();
    let n = chart.dim();
    // i_T omega as a covector
    let iota = |x: &[f64]| -> Vec<f64> {
        let q = chart.reduce(x);
        match symplectic_transverse_reduced(pair, &q) {
            Ok(s) => {
                let m = pair.omega().matrix_at(&q);
                (0..n).map(|b| (0..n).map(|i| s.vector[i] * m[i][b]).sum()).collect()
            }
            Err(_) => vec![f64::NAN; n],
        }
    };
    let values = sweep(chart, grid, |q| -> Result<f64> {
        let t = symplectic_transverse_reduced(pair, q)?;
        let partials: Vec<Vec<f64>> = (0..n).map(|a| axis_derivative_vec(chart, q, a, FD_STEP, iota)).collect();
        let e = |k: usize| {
            let mut v = vec![0.0; n];
            v[k] = 1.0;
            v
        };
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in a + 1..n {
                let first = pair.d_omega().evaluate_unchecked(q, &[t.vector.clone(), e(a), e(b)]);
                let second = partials[a][b] - partials[b][a];
                worst = worst.max((first + second).abs());
            }
        }
        Ok(worst)
    })?;
    let tolerance = tol.fd;
    let mut report = LieReport {
        passed: true,
        tier: Tier::Fd,
        tolerance,
        grid_points: values.len(),
        max_residual: 0.0,
        witness: None,
    };
    for (p, v) in values {
        let w = v?;
        if w > report.max_residual || w.is_nan() {
            report.max_residual = w;
            if !(w <= tolerance) {
                report.passed = false;
                report.witness = Some(p);
            }
        }
    }
    Ok(report)
}

/// Restriction of a sweep to `lo <= x[axis] <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow {
    pub axis: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RadialBoundsReport {
    pub passed: bool,
    pub tier: Tier,
    pub delta: f64,
    pub points_checked: usize,
    /// min of `d_r f - 2 delta r`.
    pub min_derivative_margin: f64,
    /// min of `f - delta r^2`.
    pub min_value_margin: f64,
    pub derivative_witness: Option<Vec<f64>>,
    pub value_witness: Option<Vec<f64>>,
}

/// `d_r f > 2 delta r` and `f > delta r^2` at grid points with `r > 0`
/// (and inside `window` when given).
pub fn verify_radial_bounds(
    f: &ScalarField,
    r_axis: usize,
    delta: f64,
    grid: &Grid,
    window: Option<TimeWindow>,
) -> Result<RadialBoundsReport> {
    let chart = f.chart();
    if r_axis >= chart.dim() {
        return Err(Error::InvalidParameter(format!("no axis {r_axis}")));
    }
    let dr = f.expr().diff(r_axis);
    let values = sweep(chart, grid, |q| {
        let r = q[r_axis];
        let inside = r > 0.0 && window.is_none_or(|w| q[w.axis] >= w.lo && q[w.axis] <= w.hi);
        inside.then(|| (dr.eval(q) - 2.0 * delta * r, f.expr().eval(q) - delta * r * r))
    })?;
    let mut report = RadialBoundsReport {
        passed: true,
        tier: f.tier(),
        delta,
        points_checked: 0,
        min_derivative_margin: f64::INFINITY,
        min_value_margin: f64::INFINITY,
        derivative_witness: None,
        value_witness: None,
    };
    for (p, v) in values {
        let Some((dm, vm)) = v else { continue };
        report.points_checked += 1;
        if dm < report.min_derivative_margin || dm.is_nan() {
            report.min_derivative_margin = dm;
            if !(dm > 0.0) {
                report.derivative_witness = Some(p.clone());
            }
        }
        if vm < report.min_value_margin || vm.is_nan() {
            report.min_value_margin = vm;
            if !(vm > 0.0) {
                report.value_witness = Some(p);
            }
        }
    }
    report.passed = report.derivative_witness.is_none() && report.value_witness.is_none();
    Ok(report)
}
