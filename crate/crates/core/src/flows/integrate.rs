use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{AxisKind, Chart, VectorField};

/// Time-ordered samples of an integral curve.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub points: Vec<(f64, Vec<f64>)>,
    pub step: f64,
    pub method: &'static str,
    /// True when the curve left a bounded axis before `t_end`.
    pub exited: bool,
}

impl Trajectory {
    pub fn end(&self) -> &[f64] {
        &self.points.last().expect("trajectory has a seed").1
    }

    pub fn end_time(&self) -> f64 {
        self.points.last().expect("trajectory has a seed").0
    }
}

/// One classical RK4 step of `y' = f(y, s)`.
pub(crate) fn rk4_step<F>(f: &F, y: &[f64], s: f64, h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>>,
{
    let shift = |k: &[f64], c: f64| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let k1 = f(y, s)?;
    let k2 = f(&shift(&k1, 0.5 * h), s + 0.5 * h)?;
    let k3 = f(&shift(&k2, 0.5 * h), s + 0.5 * h)?;
    let k4 = f(&shift(&k3, h), s + h)?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Step sizes covering `[0, t_end]`: `step` repeated, last one possibly shorter.
pub(crate) fn step_schedule(t_end: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidParameter(format!("step must be positive, got {step}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!("t_end must be non-negative, got {t_end}")));
    }
    let full = (t_end / step * (1.0 + 1e-12)).floor() as usize;
    let mut out = vec![step; full];
    let rest = t_end - full as f64 * step;
    if rest > step * 1e-9 {
        out.push(rest);
    }
    Ok(out)
}

pub(crate) fn inside_bounded(chart: &Chart, p: &[f64]) -> bool {
    chart.axes().iter().zip(p).all(|(a, &x)| match a.kind {
        AxisKind::Periodic { .. } => x.is_finite(),
        AxisKind::Bounded { lo, hi } => x >= lo && x <= hi,
    })
}

/// Integrate `x' = field(x)` with the chart's periodic axes wrapped.
pub(crate) fn integrate_with<F>(chart: &Chart, field: F, p0: &[f64], t_end: f64, step: f64) -> Result<Trajectory>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let start = chart.locate(p0)?;
    let steps = step_schedule(t_end, step)?;
    let f = |y: &[f64], _s: f64| field(&chart.reduce(y));
    let mut points = Vec::with_capacity(steps.len() + 1);
    points.push((0.0, start.clone()));
    let mut y = start;
    let mut t = 0.0;
    let mut exited = false;
    for (k, h) in steps.iter().enumerate() {
        let next = rk4_step(&f, &y, t, *h)?;
        if !inside_bounded(chart, &next) {
            exited = true;
            break;
        }
        y = chart.reduce(&next);
        t = if k + 1 == steps.len() { t_end } else { (k + 1) as f64 * step };
        points.push((t, y.clone()));
    }
    Ok(Trajectory {
        points,
        step,
        method: "rk4",
        exited,
    })
}

/// Fixed-step RK4 integral curve of `x` from `p0` over `[0, t_end]`.
pub fn integrate_flow(x: &VectorField, p0: &[f64], t_end: f64, step: f64) -> Result<Trajectory> {
    integrate_with(x.chart(), |q| Ok(x.eval_unchecked(q)), p0, t_end, step)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Axis;
    use std::sync::Arc;

    #[test]
    fn schedule_ends_exactly() {
        let s = step_schedule(1.0, 0.3).unwrap();
        assert_eq!(s.len(), 4);
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(step_schedule(1.0, 1e-3).unwrap().len(), 1000);
        assert!(step_schedule(1.0, 0.0).is_err());
    }

    #[test]
    fn exits_bounded_domain() {
        let c = Arc::new(Chart::new(vec![Axis::bounded("x", 0.0, 1.0)]).unwrap());
        let x = VectorField::coordinate(c, 0, 1.0);
        let tr = integrate_flow(&x, &[0.5], 1.0, 0.01).unwrap();
        assert!(tr.exited);
        assert!(tr.end()[0] <= 1.0 && tr.end()[0] > 0.98);
    }
}
