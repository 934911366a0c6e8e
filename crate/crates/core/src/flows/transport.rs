use serde::Serialize;

use super::integrate::{integrate_with, Trajectory};
use crate::error::{Error, Result};
use crate::foliated::{solve_reduced, FieldKind, FoliatedContactPair};
use crate::forms::Chart;
use crate::linalg::{kernel, orthonormal, principal_sine};
use crate::tolerance::{Tier, FLOW_FD_OFFSET};

/// Columns `D phi e_k` from neighbour trajectories started at `p +- h e_k`,
/// one matrix per sample index of the base trajectory.
pub(crate) fn flow_differentials(chart: &Chart, plus: &[Trajectory], minus: &[Trajectory], h: f64, len: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = chart.dim();
    for tr in plus.iter().chain(minus) {
        if tr.exited || tr.points.len() != len {
            return Err(Error::InvalidParameter(
                "a neighbouring trajectory left the chart; move the seed inward or shorten the flow".into(),
            ));
        }
    }
    Ok((0..len)
        .map(|i| {
            let cols: Vec<Vec<f64>> = (0..n)
                .map(|k| {
                    chart
                        .displacement(&minus[k].points[i].1, &plus[k].points[i].1)
                        .into_iter()
                        .map(|d| d / (2.0 * h))
                        .collect()
                })
                .collect();
            (0..n).map(|r| cols.iter().map(|c| c[r]).collect()).collect()
        })
        .collect())
}

pub(crate) fn neighbours(p: &[f64], h: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let shifted = |sign: f64| {
        (0..p.len())
            .map(|k| {
                let mut q = p.to_vec();
                q[k] += sign * h;
                q
            })
            .collect()
    };
    (shifted(1.0), shifted(-1.0))
}

/// Sine of the largest principal angle between `span(J u_k)` and `target`.
pub(crate) fn pushed_defect(jac: &[Vec<f64>], source: &nalgebra::DMatrix<f64>, target: &nalgebra::DMatrix<f64>) -> f64 {
    let n = jac.len();
    let cols: Vec<Vec<f64>> = (0..source.ncols())
        .map(|c| (0..n).map(|r| (0..n).map(|k| jac[r][k] * source[(k, c)]).sum()).collect())
        .collect();
    principal_sine(target, &orthonormal(&cols))
}

#[derive(Debug, Clone, Serialize)]
pub struct PreservationReport {
    pub tier: Tier,
    pub offset: f64,
    /// `(time, sine of the largest principal angle)` at sampled times.
    pub samples: Vec<(f64, f64)>,
    pub max_defect: f64,
}

/// Integrate the transverse field from `p0` and measure how well its flow
/// carries `ker alpha` onto itself.
pub fn parallel_transport(pair: &FoliatedContactPair, p0: &[f64], t_end: f64, step: f64) -> Result<(Trajectory, PreservationReport)> {
    parallel_transport_with_offset(pair, p0, t_end, step, FLOW_FD_OFFSET)
}

pub fn parallel_transport_with_offset(
    pair: &FoliatedContactPair,
    p0: &[f64],
    t_end: f64,
    step: f64,
    offset: f64,
) -> Result<(Trajectory, PreservationReport)> {
    let chart = pair.chart();
    let n = chart.dim();
    let field = |q: &[f64]| solve_reduced(pair, q, FieldKind::Transverse).map(|s| s.vector);
    let base = integrate_with(chart, field, p0, t_end, step)?;
    if base.exited {
        return Err(Error::OutOfDomain {
            point: base.end().to_vec(),
            axis: "transport left the chart".into(),
        });
    }
    let seed = chart.locate(p0)?;
    let (up, down) = neighbours(&seed, offset);
    let plus = up
        .iter()
        .map(|q| integrate_with(chart, field, q, t_end, step))
        .collect::<Result<Vec<_>>>()?;
    let minus = down
        .iter()
        .map(|q| integrate_with(chart, field, q, t_end, step))
        .collect::<Result<Vec<_>>>()?;
    let len = base.points.len();
    let jacs = flow_differentials(chart, &plus, &minus, offset, len)?;
    let kernel_at = |q: &[f64]| kernel(&[pair.alpha().covector_at(q)], n, n - 1).0;
    let source = kernel_at(&seed);
    let every = (len / 10).max(1);
    let mut samples = Vec::new();
    for i in (every..len).step_by(every).chain(std::iter::once(len - 1)) {
        if samples.last().is_some_and(|(t, _)| *t == base.points[i].0) {
            continue;
        }
        let (t, q) = &base.points[i];
        samples.push((*t, pushed_defect(&jacs[i], &source, &kernel_at(q))));
    }
    let max_defect = samples.iter().map(|s| s.1).fold(0.0, f64::max);
    Ok((
        base,
        PreservationReport {
            tier: Tier::Fd,
            offset,
            samples,
            max_defect,
        },
    ))
}
