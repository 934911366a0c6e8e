//! Browser bindings. Each export is a thin wrapper over a plain function
//! that is tested natively.

use std::f64::consts::TAU;

use foliated_contact::constructions::{cutoff, lutz_profile, Interval, NestedIntervals};
use foliated_contact::flows::{gray_flow, ContactFamily};
use foliated_contact::forms::{DifferentialForm, Expr};
use foliated_contact::models::t4_chart;
use wasm_bindgen::prelude::*;

/// Rows `[r, h1, h2, angle, h1 h2' - h2 h1']` at `samples` radii in `(0, R]`.
pub fn profile_rows(r_outer: f64, samples: usize) -> Result<Vec<f64>, String> {
    let profile = lutz_profile(r_outer).map_err(|e| e.to_string())?;
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let mut out = Vec::with_capacity(5 * samples);
    for k in 1..=samples {
        let r = r_outer * k as f64 / samples as f64;
        out.extend([
            r,
            profile.h1.expr().eval(&[r]),
            profile.h2.expr().eval(&[r]),
            profile.angle.expr().eval(&[r]),
            profile.contact_term(r),
        ]);
    }
    Ok(out)
}

/// Rows `[t, chi(t)]` over the outer interval; bounds are
/// `[inner.lo, inner.hi, middle.lo, middle.hi, outer.lo, outer.hi]`.
pub fn cutoff_rows(bounds: [f64; 6], samples: usize) -> Result<Vec<f64>, String> {
    let intervals = NestedIntervals {
        inner: Interval::new(bounds[0], bounds[1]),
        middle: Interval::new(bounds[2], bounds[3]),
        outer: Interval::new(bounds[4], bounds[5]),
    };
    let chi = cutoff(&intervals).map_err(|e| e.to_string())?;
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    let (lo, hi) = (bounds[4], bounds[5]);
    Ok((0..samples)
        .flat_map(|k| {
            let t = lo + (hi - lo) * k as f64 / (samples - 1) as f64;
            [t, chi.expr().eval(&[t])]
        })
        .collect())
}

/// Gray flow of the rotating family on T^4 with `beta = -dt + p dx + q dy + r dz`.
#[wasm_bindgen]
pub struct GrayTrace {
    points: Vec<f64>,
    defect: f64,
    max_beta_x: f64,
}

#[wasm_bindgen]
impl GrayTrace {
    /// Rows `[s, t, x, y, z, ln g]`.
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    pub fn max_beta_x(&self) -> f64 {
        self.max_beta_x
    }
}

pub fn gray_trace_native(beta: [f64; 3], seed: [f64; 4], step: f64) -> Result<GrayTrace, String> {
    let chart = t4_chart();
    let err = |e: foliated_contact::Error| e.to_string();
    let b = DifferentialForm::one_form(
        chart.clone(),
        vec![Expr::constant(-1.0), Expr::constant(beta[0]), Expr::constant(beta[1]), Expr::constant(beta[2])],
    )
    .map_err(err)?;
    let phase = Expr::var(3).add(&Expr::var(4)).scale(TAU);
    let family = ContactFamily::new(
        b,
        DifferentialForm::volume(chart, 1.0),
        vec![Expr::zero(), phase.sin(), phase.cos(), Expr::zero()],
    )
    .map_err(err)?;
    let res = gray_flow(&family, &[seed.to_vec()], step).map_err(err)?;
    let state = &res.states[0];
    let mut points = Vec::with_capacity(6 * state.log_g.len());
    for ((s, p), lg) in state.trajectory.points.iter().zip(&state.log_g) {
        points.push(*s);
        points.extend_from_slice(p);
        points.push(*lg);
    }
    Ok(GrayTrace {
        points,
        defect: res.conjugation.max_defect,
        max_beta_x: res.conjugation.max_beta_x,
    })
}

#[wasm_bindgen]
pub fn lutz_profile_curve(r_outer: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    profile_rows(r_outer, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn vanishing_cutoff(bounds: Vec<f64>, samples: usize) -> Result<Vec<f64>, JsError> {
    let b: [f64; 6] = bounds
        .try_into()
        .map_err(|_| JsError::new("expected six interval bounds"))?;
    cutoff_rows(b, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn gray_trace(p: f64, q: f64, r: f64, seed: Vec<f64>, step: f64) -> Result<GrayTrace, JsError> {
    let s: [f64; 4] = seed.try_into().map_err(|_| JsError::new("expected a 4-dimensional seed"))?;
    gray_trace_native([p, q, r], s, step).map_err(|e| JsError::new(&e))
}
