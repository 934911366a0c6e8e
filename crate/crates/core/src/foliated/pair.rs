use std::sync::Arc;

use super::verify::{verify_contact_foliation, verify_symplectic_foliation, ContactReport, SymplecticReport};
use crate::error::{Error, Result};
use super::leaf::LeafContactForm;
use crate::forms::{Chart, DifferentialForm, Expr, Grid};
use crate::tolerance::Tier;

/// Associated pair `(beta, alpha)`: `ker beta` is the foliation, `ker alpha`
/// the extension, their intersection the leafwise contact structure.
#[derive(Clone, Debug)]
pub struct FoliatedContactPair {
    chart: Arc<Chart>,
    beta: DifferentialForm,
    alpha: DifferentialForm,
    orientation: DifferentialForm,
    d_alpha: DifferentialForm,
    contact_top: DifferentialForm,
    certificate: Option<Arc<ContactReport>>,
}

fn check_one_form(name: &str, f: &DifferentialForm, chart: &Arc<Chart>) -> Result<()> {
    if f.degree() != 1 {
        return Err(Error::InvalidDegree {
            op: if name == "alpha" { "alpha" } else { "beta" },
            degree: f.degree(),
            dim: chart.dim(),
        });
    }
    if **f.chart() != **chart {
        return Err(Error::ChartMismatch(format!("{name} lives on another chart")));
    }
    Ok(())
}

impl FoliatedContactPair {
    /// Uncertified pair; `orientation` must be a top-degree form.
    pub fn new(beta: DifferentialForm, alpha: DifferentialForm, orientation: DifferentialForm) -> Result<Self> {
        let chart = beta.chart().clone();
        let dim = chart.dim();
        if dim < 4 || dim % 2 != 0 {
            return Err(Error::InvalidChart(format!(
                "contact foliations need an even dimension >= 4, got {dim}"
            )));
        }
        check_one_form("beta", &beta, &chart)?;
        check_one_form("alpha", &alpha, &chart)?;
        if orientation.degree() != dim || **orientation.chart() != *chart {
            return Err(Error::InvalidDegree {
                op: "orientation",
                degree: orientation.degree(),
                dim,
            });
        }
        let d_alpha = alpha.d();
        let mut top = alpha.clone();
        for _ in 0..(dim - 2) / 2 {
            top = top.wedge(&d_alpha)?;
        }
        let contact_top = top.wedge(&beta)?;
        Ok(Self {
            chart,
            beta,
            alpha,
            orientation,
            d_alpha,
            contact_top,
            certificate: None,
        })
    }

    /// Run the contact check on `grid` and attach the passing report.
    pub fn certify(mut self, grid: &Grid) -> Result<Self> {
        let report = verify_contact_foliation(&self, grid)?;
        if !report.passed {
            return Err(Error::NotCertified(report.summary()));
        }
        self.certificate = Some(Arc::new(report));
        Ok(self)
    }

    pub fn certificate(&self) -> Option<&ContactReport> {
        self.certificate.as_deref()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn beta(&self) -> &DifferentialForm {
        &self.beta
    }

    pub fn alpha(&self) -> &DifferentialForm {
        &self.alpha
    }

    pub fn d_alpha(&self) -> &DifferentialForm {
        &self.d_alpha
    }

    pub fn orientation(&self) -> &DifferentialForm {
        &self.orientation
    }

    /// `alpha ^ (d alpha)^n ^ beta`.
    pub fn contact_top(&self) -> &DifferentialForm {
        &self.contact_top
    }

    pub fn tier(&self) -> Tier {
        self.alpha.tier().join(self.beta.tier())
    }

    /// The leaf `x[axis] = value`, available when `beta` is the coordinate
    /// form of `axis`. The leaf orientation `w` satisfies `w ^ beta = orientation`.
    pub fn leaf(&self, axis: usize, value: f64) -> Result<LeafContactForm> {
        let dim = self.chart.dim();
        let is_coordinate = self.beta.terms().count() == 1
            && self.beta.component(&[axis]).as_const() == Some(1.0);
        if axis >= dim || !is_coordinate {
            return Err(Error::InvalidParameter(format!(
                "beta is not the coordinate form of axis {axis}"
            )));
        }
        let leaf_chart = Arc::new(self.chart.without_axis(axis)?);
        let alpha = self.alpha.restrict(axis, value, leaf_chart.clone())?;
        let sign = if (dim - 1 - axis) % 2 == 0 { 1.0 } else { -1.0 };
        let coeff = self.orientation.component(&(0..dim).collect::<Vec<_>>()).scale(sign);
        let vol = DifferentialForm::volume(leaf_chart.clone(), 1.0)
            .scale(&coeff.substitute(&restriction_args(dim, axis, value)));
        LeafContactForm::new(alpha, vol)
    }
}

fn restriction_args(dim: usize, axis: usize, value: f64) -> Vec<Expr> {
    (0..dim)
        .map(|i| match i.cmp(&axis) {
            std::cmp::Ordering::Less => Expr::var(i),
            std::cmp::Ordering::Equal => Expr::constant(value),
            std::cmp::Ordering::Greater => Expr::var(i - 1),
        })
        .collect()
}

/// Foliation `ker beta` with a 2-form `omega` extending the leafwise
/// symplectic forms.
#[derive(Clone, Debug)]
pub struct SymplecticFoliationPair {
    chart: Arc<Chart>,
    beta: DifferentialForm,
    omega: DifferentialForm,
    d_omega: DifferentialForm,
    volume_top: DifferentialForm,
    certificate: Option<Arc<SymplecticReport>>,
}

impl SymplecticFoliationPair {
    pub fn new(beta: DifferentialForm, omega: DifferentialForm) -> Result<Self> {
        let chart = beta.chart().clone();
        let dim = chart.dim();
        if dim < 3 || dim % 2 != 1 {
            return Err(Error::InvalidChart(format!(
                "symplectic foliations need an odd dimension >= 3, got {dim}"
            )));
        }
        check_one_form("beta", &beta, &chart)?;
        if omega.degree() != 2 || **omega.chart() != *chart {
            return Err(Error::InvalidDegree {
                op: "omega",
                degree: omega.degree(),
                dim,
            });
        }
        let d_omega = omega.d();
        let mut top = omega.clone();
        for _ in 1..(dim - 1) / 2 {
            top = top.wedge(&omega)?;
        }
        let volume_top = top.wedge(&beta)?;
        Ok(Self {
            chart,
            beta,
            omega,
            d_omega,
            volume_top,
            certificate: None,
        })
    }

    pub fn certify(mut self, grid: &Grid) -> Result<Self> {
        let report = verify_symplectic_foliation(&self, grid)?;
        if !report.passed {
            return Err(Error::NotCertified(report.summary()));
        }
        self.certificate = Some(Arc::new(report));
        Ok(self)
    }

    pub fn certificate(&self) -> Option<&SymplecticReport> {
        self.certificate.as_deref()
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.is_some()
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn beta(&self) -> &DifferentialForm {
        &self.beta
    }

    pub fn omega(&self) -> &DifferentialForm {
        &self.omega
    }

    pub fn d_omega(&self) -> &DifferentialForm {
        &self.d_omega
    }

    /// `omega^n ^ beta`.
    pub fn volume_top(&self) -> &DifferentialForm {
        &self.volume_top
    }

    pub fn tier(&self) -> Tier {
        self.omega.tier().join(self.beta.tier())
    }
}
