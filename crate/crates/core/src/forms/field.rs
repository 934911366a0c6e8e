use std::sync::Arc;

use super::chart::Chart;
use super::expr::Expr;
use crate::error::{Error, Result};
use crate::tolerance::{Tier, FD_STEP};

/// A real function on a chart.
#[derive(Clone, Debug)]
pub struct ScalarField {
    chart: Arc<Chart>,
    expr: Expr,
}

impl ScalarField {
    pub fn new(chart: Arc<Chart>, expr: Expr) -> Self {
        Self { chart, expr }
    }

    /// Opaque function; derivatives fall back to finite differences.
    pub fn from_fn<F>(chart: Arc<Chart>, label: &str, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let dim = chart.dim();
        Self::new(chart, Expr::from_fn(dim, label, f))
    }

    /// Opaque function with exact partials supplied by the caller.
    pub fn with_partials<F>(chart: Arc<Chart>, label: &str, f: F, partials: Vec<Expr>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        let dim = chart.dim();
        Self::new(chart, Expr::from_fn_with_partials(dim, label, f, partials))
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn value(&self, p: &[f64]) -> Result<f64> {
        let q = self.chart.locate(p)?;
        Ok(self.expr.eval(&q))
    }

    pub fn partial(&self, i: usize) -> ScalarField {
        Self::new(self.chart.clone(), self.expr.diff(i))
    }

    pub fn tier(&self) -> Tier {
        self.expr.tier()
    }

    /// Largest disagreement between the partials and central differences of
    /// the value over `points`.
    pub fn check_partials(&self, points: &[Vec<f64>]) -> f64 {
        let dim = self.chart.dim();
        let partials: Vec<Expr> = (0..dim).map(|i| self.expr.diff(i)).collect();
        let mut worst = 0.0f64;
        for p in points {
            let q = self.chart.reduce(p);
            let mut y = q.clone();
            for (i, d) in partials.iter().enumerate() {
                y[i] = q[i] + FD_STEP;
                let fp = self.expr.eval(&y);
                y[i] = q[i] - FD_STEP;
                let fm = self.expr.eval(&y);
                y[i] = q[i];
                let fd = (fp - fm) / (2.0 * FD_STEP);
                worst = worst.max((d.eval(&q) - fd).abs());
            }
        }
        worst
    }
}

/// A vector field on a chart, one expression per coordinate direction.
#[derive(Clone, Debug)]
pub struct VectorField {
    chart: Arc<Chart>,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != chart.dim() {
            return Err(Error::Arity {
                expected: chart.dim(),
                got: comps.len(),
            });
        }
        Ok(Self { chart, comps })
    }

    pub fn zero(chart: Arc<Chart>) -> Self {
        let comps = vec![Expr::zero(); chart.dim()];
        Self { chart, comps }
    }

    /// The coordinate field `d/dx_i`, optionally scaled.
    pub fn coordinate(chart: Arc<Chart>, i: usize, scale: f64) -> Self {
        let mut comps = vec![Expr::zero(); chart.dim()];
        comps[i] = Expr::constant(scale);
        Self { chart, comps }
    }

    pub fn constant(chart: Arc<Chart>, v: &[f64]) -> Result<Self> {
        Self::new(chart, v.iter().map(|&c| Expr::constant(c)).collect())
    }

    /// Field computed pointwise by `f` (one call per component evaluation).
    pub fn from_fn<F>(chart: Arc<Chart>, label: &str, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        let dim = chart.dim();
        let f = Arc::new(f);
        let comps = (0..dim)
            .map(|i| {
                let f = f.clone();
                Expr::from_fn(dim, &format!("{label}[{i}]"), move |p| f(p)[i])
            })
            .collect();
        Self { chart, comps }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, i: usize) -> &Expr {
        &self.comps[i]
    }

    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        let q = self.chart.locate(p)?;
        Ok(self.eval_unchecked(&q))
    }

    pub fn eval_unchecked(&self, p: &[f64]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval(p)).collect()
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        super::form::same_chart(&self.chart, &other.chart)?;
        Ok(Self {
            chart: self.chart.clone(),
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        })
    }

    pub fn scale(&self, f: &Expr) -> VectorField {
        Self {
            chart: self.chart.clone(),
            comps: self.comps.iter().map(|c| f.mul(c)).collect(),
        }
    }

    pub fn tier(&self) -> Tier {
        self.comps.iter().fold(Tier::Exact, |t, c| t.join(c.tier()))
    }
}
