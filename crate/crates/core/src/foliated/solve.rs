//! Pointwise linear solves for the transverse and Reeb fields.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::pair::{FoliatedContactPair, SymplecticFoliationPair};
use crate::error::{Error, Result};
use crate::forms::{Grid, VectorField};
use crate::linalg::{self, least_squares};
use crate::tolerance::{Tier, RANK_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Transverse,
    Reeb,
}

/// Solution of one pointwise system.
#[derive(Debug, Clone, Serialize)]
pub struct FieldSolution {
    pub point: Vec<f64>,
    pub vector: Vec<f64>,
    /// Proportionality scalar: `i_T da = c a`, resp. `i_R da = c b`.
    pub c: f64,
    pub residual: f64,
    pub condition: f64,
}

pub(crate) fn finish(q: Vec<f64>, rows: Vec<Vec<f64>>, rhs: Vec<f64>, n: usize) -> Result<FieldSolution> {
    let ls = least_squares(&rows, &rhs);
    if !(ls.condition.is_finite() && 1.0 / ls.condition > RANK_TOL) {
        return Err(Error::RankDeficient {
            point: q,
            ratio: 1.0 / ls.condition,
        });
    }
    let mut x = ls.x;
    let c = if x.len() > n { x.pop().unwrap() } else { 0.0 };
    Ok(FieldSolution {
        point: q,
        vector: x,
        c,
        residual: ls.residual,
        condition: ls.condition,
    })
}

/// Assemble and solve at an already reduced point.
pub(crate) fn solve_reduced(pair: &FoliatedContactPair, q: &[f64], kind: FieldKind) -> Result<FieldSolution> {
    let a = pair.alpha().covector_at(q);
    let b = pair.beta().covector_at(q);
    let m = pair.d_alpha().matrix_at(q);
    solve_arrays(q, &a, &b, &m, kind)
}

/// The pointwise system from raw values: covectors `a`, `b` and the matrix
/// `m[i][j] = da(e_i, e_j)`.
pub(crate) fn solve_arrays(q: &[f64], a: &[f64], b: &[f64], m: &[Vec<f64>], kind: FieldKind) -> Result<FieldSolution> {
    let n = a.len();
    // unknowns: vector components, then c
    let mut rows = Vec::with_capacity(n + 2);
    let mut rhs = Vec::with_capacity(n + 2);
    let (first, second) = match kind {
        FieldKind::Transverse => (a, b),
        FieldKind::Reeb => (b, a),
    };
    let coupled = first;
    let mut r0 = first.to_vec();
    r0.push(0.0);
    rows.push(r0);
    rhs.push(0.0);
    let mut r1 = second.to_vec();
    r1.push(0.0);
    rows.push(r1);
    rhs.push(1.0);
    for j in 0..n {
        let mut row: Vec<f64> = (0..n).map(|i| m[i][j]).collect();
        row.push(-coupled[j]);
        rows.push(row);
        rhs.push(0.0);
    }
    finish(q.to_vec(), rows, rhs, n)
}

/// `a(T) = 0, b(T) = 1, da(T, .) = c a`.
pub fn solve_transverse_field(pair: &FoliatedContactPair, p: &[f64]) -> Result<FieldSolution> {
    let q = pair.chart().locate(p)?;
    solve_reduced(pair, &q, FieldKind::Transverse)
}

/// `a(R) = 1, b(R) = 0, da(R, .) = c b`.
pub fn solve_reeb_field(pair: &FoliatedContactPair, p: &[f64]) -> Result<FieldSolution> {
    let q = pair.chart().locate(p)?;
    solve_reduced(pair, &q, FieldKind::Reeb)
}

/// The solved field as a vector field (each evaluation solves pointwise;
/// derivatives of it are finite differences).
pub fn solved_field(pair: &FoliatedContactPair, kind: FieldKind) -> VectorField {
    let p = Arc::new(pair.clone());
    let n = pair.chart().dim();
    let label = match kind {
        FieldKind::Transverse => "T",
        FieldKind::Reeb => "R",
    };
    VectorField::from_fn(pair.chart().clone(), label, move |x| {
        let q = p.chart().reduce(x);
        solve_reduced(&p, &q, kind)
            .map(|s| s.vector)
            .unwrap_or_else(|_| vec![f64::NAN; n])
    })
}

/// |det| of the frame (orthonormal basis of xi, R, T) at a point.
pub fn frame_determinant(pair: &FoliatedContactPair, p: &[f64]) -> Result<f64> {
    let q = pair.chart().locate(p)?;
    let n = pair.chart().dim();
    let t = solve_reduced(pair, &q, FieldKind::Transverse)?;
    let r = solve_reduced(pair, &q, FieldKind::Reeb)?;
    Ok(frame_det_with(pair, &q, &t.vector, &r.vector, n))
}

fn frame_det_with(pair: &FoliatedContactPair, q: &[f64], t: &[f64], r: &[f64], n: usize) -> f64 {
    let rows = vec![pair.alpha().covector_at(q), pair.beta().covector_at(q)];
    let (xi, _) = linalg::kernel(&rows, n, n - 2);
    let mut cols: Vec<Vec<f64>> = (0..n - 2)
        .map(|c| (0..n).map(|i| xi[(i, c)]).collect())
        .collect();
    cols.push(r.to_vec());
    cols.push(t.to_vec());
    let m: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    crate::forms::form::det(m).abs()
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSample {
    #[serde(flatten)]
    pub solution: FieldSolution,
    /// |det| of (xi basis, R, T).
    pub frame_det: f64,
    /// Re-substitution error of the normalisations `a(.)`, `b(.)`.
    pub duality_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldSolveReport {
    pub kind: FieldKind,
    pub tier: Tier,
    pub grid: Grid,
    pub samples: Vec<FieldSample>,
    pub max_residual: f64,
    pub max_condition: f64,
    pub min_frame_det: f64,
    pub max_duality_error: f64,
}

/// Solve on every grid point.
pub fn solve_fields(pair: &FoliatedContactPair, grid: &Grid, kind: FieldKind) -> Result<FieldSolveReport> {
    let chart = pair.chart();
    let n = chart.dim();
    let points = grid.points(chart)?;
    let samples: Vec<Result<FieldSample>> = points
        .par_iter()
        .map(|p| {
            let q = chart.reduce(p);
            let t = solve_reduced(pair, &q, FieldKind::Transverse)?;
            let r = solve_reduced(pair, &q, FieldKind::Reeb)?;
            let dot = |w: &[f64], v: &[f64]| w.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
            let a = pair.alpha().covector_at(&q);
            let b = pair.beta().covector_at(&q);
            let duality_error = match kind {
                FieldKind::Transverse => dot(&a, &t.vector).abs().max((dot(&b, &t.vector) - 1.0).abs()),
                FieldKind::Reeb => (dot(&a, &r.vector) - 1.0).abs().max(dot(&b, &r.vector).abs()),
            };
            let frame_det = frame_det_with(pair, &q, &t.vector, &r.vector, n);
            let solution = match kind {
                FieldKind::Transverse => t,
                FieldKind::Reeb => r,
            };
            Ok(FieldSample {
                solution,
                frame_det,
                duality_error,
            })
        })
        .collect();
    let mut out = Vec::with_capacity(samples.len());
    for s in samples {
        out.push(s?);
    }
    let max_residual = out.iter().map(|s| s.solution.residual).fold(0.0, f64::max);
    let max_condition = out.iter().map(|s| s.solution.condition).fold(0.0, f64::max);
    let min_frame_det = out.iter().map(|s| s.frame_det).fold(f64::INFINITY, f64::min);
    let max_duality_error = out.iter().map(|s| s.duality_error).fold(0.0, f64::max);
    Ok(FieldSolveReport {
        kind,
        tier: pair.tier(),
        grid: grid.clone(),
        samples: out,
        max_residual,
        max_condition,
        min_frame_det,
        max_duality_error,
    })
}

/// `i_T omega = 0, b(T) = 1`.
pub fn solve_symplectic_transverse(pair: &SymplecticFoliationPair, p: &[f64]) -> Result<FieldSolution> {
    let q = pair.chart().locate(p)?;
    symplectic_transverse_reduced(pair, &q)
}

pub(crate) fn symplectic_transverse_reduced(pair: &SymplecticFoliationPair, q: &[f64]) -> Result<FieldSolution> {
    let n = pair.chart().dim();
    let m = pair.omega().matrix_at(q);
    let mut rows: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| m[i][j]).collect()).collect();
    let mut rhs = vec![0.0; n];
    rows.push(pair.beta().covector_at(q));
    rhs.push(1.0);
    finish(q.to_vec(), rows, rhs, n)
}

/// Symplectic transverse field as a vector field.
pub fn symplectic_transverse_field(pair: &SymplecticFoliationPair) -> VectorField {
    let p = Arc::new(pair.clone());
    let n = pair.chart().dim();
    VectorField::from_fn(pair.chart().clone(), "T", move |x| {
        let q = p.chart().reduce(x);
        symplectic_transverse_reduced(&p, &q)
            .map(|s| s.vector)
            .unwrap_or_else(|_| vec![f64::NAN; n])
    })
}
