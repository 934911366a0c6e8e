use std::sync::Arc;

use super::sweep;
use super::verify::ContactReport;
use crate::error::{Error, Result};
use crate::forms::{Chart, DifferentialForm, Grid};
use crate::tolerance::{Tier, Tolerances};

/// Contact form on a single leaf chart of odd dimension.
#[derive(Clone, Debug)]
pub struct LeafContactForm {
    chart: Arc<Chart>,
    alpha: DifferentialForm,
    orientation: DifferentialForm,
    top: DifferentialForm,
}

impl LeafContactForm {
    pub fn new(alpha: DifferentialForm, orientation: DifferentialForm) -> Result<Self> {
        let chart = alpha.chart().clone();
        let dim = chart.dim();
        if dim % 2 != 1 {
            return Err(Error::InvalidChart(format!("leaf charts have odd dimension, got {dim}")));
        }
        if alpha.degree() != 1 || orientation.degree() != dim || **orientation.chart() != *chart {
            return Err(Error::InvalidDegree {
                op: "leaf contact form",
                degree: alpha.degree(),
                dim,
            });
        }
        let da = alpha.d();
        let mut top = alpha.clone();
        for _ in 0..dim / 2 {
            top = top.wedge(&da)?;
        }
        Ok(Self {
            chart,
            alpha,
            orientation,
            top,
        })
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn alpha(&self) -> &DifferentialForm {
        &self.alpha
    }

    pub fn orientation(&self) -> &DifferentialForm {
        &self.orientation
    }

    /// `alpha ^ (d alpha)^n`.
    pub fn contact_top(&self) -> &DifferentialForm {
        &self.top
    }

    pub fn tier(&self) -> Tier {
        self.alpha.tier()
    }

    /// Positivity of `alpha ^ (d alpha)^n` against the orientation.
    pub fn verify(&self, grid: &Grid) -> Result<ContactReport> {
        self.verify_with(grid, &Tolerances::default())
    }

    pub fn verify_with(&self, grid: &Grid, tol: &Tolerances) -> Result<ContactReport> {
        let values = sweep(&self.chart, grid, |q| {
            (self.top.top_at(q) / self.orientation.top_at(q), self.alpha.max_abs_at(q))
        })?;
        let mut report = ContactReport {
            passed: true,
            tier: self.tier(),
            positivity_margin: tol.positivity,
            grid_points: values.len(),
            min_ratio: f64::INFINITY,
            max_ratio: f64::NEG_INFINITY,
            min_beta: None,
            min_alpha_wedge_beta: None,
            witness: None,
            reason: None,
        };
        for (p, (ratio, a)) in values {
            report.max_ratio = report.max_ratio.max(ratio);
            if ratio < report.min_ratio || ratio.is_nan() {
                report.min_ratio = ratio;
            }
            let fail = if a == 0.0 {
                Some("alpha vanishes")
            } else if !(ratio > tol.positivity) {
                Some("contact condition fails")
            } else {
                None
            };
            if let (Some(reason), true) = (fail, report.passed) {
                report.passed = false;
                report.witness = Some(p);
                report.reason = Some(reason.into());
            }
        }
        Ok(report)
    }
}
