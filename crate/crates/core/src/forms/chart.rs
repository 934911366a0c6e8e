use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance::{DEFAULT_GRID, GRID_CAP};

/// Slack allowed when testing membership of a bounded axis.
const DOMAIN_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AxisKind {
    Periodic { period: f64 },
    Bounded { lo: f64, hi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Axis {
    pub name: String,
    pub kind: AxisKind,
}

impl Axis {
    pub fn periodic(name: &str, period: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: AxisKind::Periodic { period },
        }
    }

    pub fn bounded(name: &str, lo: f64, hi: f64) -> Self {
        Self {
            name: name.to_string(),
            kind: AxisKind::Bounded { lo, hi },
        }
    }

    /// Sampling range: `[0, period)` or `[lo, hi]`.
    pub fn range(&self) -> (f64, f64) {
        match self.kind {
            AxisKind::Periodic { period } => (0.0, period),
            AxisKind::Bounded { lo, hi } => (lo, hi),
        }
    }
}

/// Coordinate domain with per-axis periodicity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Chart {
    axes: Vec<Axis>,
}

impl Chart {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 6 {
            return Err(Error::InvalidChart(format!(
                "dimension {} outside 1..=6",
                axes.len()
            )));
        }
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidChart(format!("duplicate axis '{}'", a.name)));
            }
            match a.kind {
                AxisKind::Periodic { period } if !(period > 0.0 && period.is_finite()) => {
                    return Err(Error::InvalidChart(format!(
                        "axis '{}' has non-positive period",
                        a.name
                    )))
                }
                AxisKind::Bounded { lo, hi } if !(lo < hi && lo.is_finite() && hi.is_finite()) => {
                    return Err(Error::InvalidChart(format!(
                        "axis '{}' has empty interior",
                        a.name
                    )))
                }
                _ => {}
            }
        }
        Ok(Self { axes })
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis_names(&self) -> Vec<String> {
        self.axes.iter().map(|a| a.name.clone()).collect()
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    /// Reduce periodic coordinates into `[0, period)`.
    pub fn reduce(&self, p: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(p)
            .map(|(a, &x)| match a.kind {
                AxisKind::Periodic { period } => x.rem_euclid(period),
                AxisKind::Bounded { .. } => x,
            })
            .collect()
    }

    /// Reduce and check membership of bounded axes.
    pub fn locate(&self, p: &[f64]) -> Result<Vec<f64>> {
        if p.len() != self.dim() {
            return Err(Error::Arity {
                expected: self.dim(),
                got: p.len(),
            });
        }
        for (a, &x) in self.axes.iter().zip(p) {
            let ok = match a.kind {
                AxisKind::Periodic { .. } => x.is_finite(),
                AxisKind::Bounded { lo, hi } => {
                    x >= lo - DOMAIN_SLACK && x <= hi + DOMAIN_SLACK
                }
            };
            if !ok {
                return Err(Error::OutOfDomain {
                    point: p.to_vec(),
                    axis: a.name.clone(),
                });
            }
        }
        Ok(self.reduce(p))
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.locate(p).is_ok()
    }

    /// Minimal-image displacement `b - a` (periodic axes folded into `(-P/2, P/2]`).
    pub fn displacement(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        self.axes
            .iter()
            .zip(a.iter().zip(b))
            .map(|(ax, (&x, &y))| match ax.kind {
                AxisKind::Periodic { period } => {
                    let mut d = (y - x).rem_euclid(period);
                    if d > 0.5 * period {
                        d -= period;
                    }
                    d
                }
                AxisKind::Bounded { .. } => y - x,
            })
            .collect()
    }

    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.displacement(a, b).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// Cartesian product `self x other` (axes of `self` first).
    pub fn product(&self, other: &Chart) -> Result<Chart> {
        let mut axes = self.axes.clone();
        axes.extend(other.axes.iter().cloned());
        Chart::new(axes)
    }

    /// The chart with axis `index` removed.
    pub fn without_axis(&self, index: usize) -> Result<Chart> {
        let mut axes = self.axes.clone();
        axes.remove(index);
        Chart::new(axes)
    }

    /// Same axes with one axis range replaced.
    pub fn with_axis(&self, index: usize, axis: Axis) -> Result<Chart> {
        let mut axes = self.axes.clone();
        axes[index] = axis;
        Chart::new(axes)
    }
}

/// How one axis is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AxisSamples {
    /// `n` points over the axis' own range (periodic: endpoint excluded).
    Count { n: usize },
    /// `n` points over `[lo, hi]` inclusive.
    Range { lo: f64, hi: f64, n: usize },
    /// A single coordinate value.
    Fixed { value: f64 },
}

/// Tensor-product sampling grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub axes: Vec<AxisSamples>,
}

impl Grid {
    pub fn uniform(dim: usize, n: usize) -> Self {
        Self {
            axes: vec![AxisSamples::Count { n }; dim],
        }
    }

    /// `DEFAULT_GRID` points per axis, reduced uniformly when that would
    /// exceed `GRID_CAP`.
    pub fn default_for(chart: &Chart) -> Self {
        let mut n = DEFAULT_GRID;
        while n > 2 && n.pow(chart.dim() as u32) > GRID_CAP {
            n -= 1;
        }
        Self::uniform(chart.dim(), n)
    }

    pub fn with(mut self, index: usize, samples: AxisSamples) -> Self {
        self.axes[index] = samples;
        self
    }

    pub fn len(&self) -> usize {
        self.axes
            .iter()
            .map(|a| match a {
                AxisSamples::Count { n } | AxisSamples::Range { n, .. } => *n,
                AxisSamples::Fixed { .. } => 1,
            })
            .product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis_values(chart: &Chart, i: usize, s: &AxisSamples) -> Vec<f64> {
        let linspace = |lo: f64, hi: f64, n: usize, closed: bool| -> Vec<f64> {
            match n {
                0 => vec![],
                1 => vec![if closed { 0.5 * (lo + hi) } else { lo }],
                _ => {
                    let div = if closed { (n - 1) as f64 } else { n as f64 };
                    (0..n).map(|k| lo + (hi - lo) * k as f64 / div).collect()
                }
            }
        };
        match *s {
            AxisSamples::Count { n } => match chart.axes[i].kind {
                AxisKind::Periodic { period } => linspace(0.0, period, n, false),
                AxisKind::Bounded { lo, hi } => linspace(lo, hi, n, true),
            },
            AxisSamples::Range { lo, hi, n } => linspace(lo, hi, n, true),
            AxisSamples::Fixed { value } => vec![value],
        }
    }

    /// All grid points in row-major order (last axis fastest).
    pub fn points(&self, chart: &Chart) -> Result<Vec<Vec<f64>>> {
        if self.axes.len() != chart.dim() {
            return Err(Error::Arity {
                expected: chart.dim(),
                got: self.axes.len(),
            });
        }
        let total = self.len();
        if total > GRID_CAP {
            return Err(Error::GridTooLarge {
                points: total,
                cap: GRID_CAP,
            });
        }
        let values: Vec<Vec<f64>> = self
            .axes
            .iter()
            .enumerate()
            .map(|(i, s)| Self::axis_values(chart, i, s))
            .collect();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; values.len()];
        if values.iter().any(|v| v.is_empty()) {
            return Ok(out);
        }
        loop {
            out.push(idx.iter().zip(&values).map(|(&k, v)| v[k]).collect());
            let mut ax = values.len();
            loop {
                if ax == 0 {
                    return Ok(out);
                }
                ax -= 1;
                idx[ax] += 1;
                if idx[ax] < values[ax].len() {
                    break;
                }
                idx[ax] = 0;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus() -> Chart {
        Chart::new(vec![Axis::periodic("t", 1.0), Axis::bounded("x", -1.0, 1.0)]).unwrap()
    }

    #[test]
    fn rejects_bad_axes() {
        assert!(Chart::new(vec![]).is_err());
        assert!(Chart::new(vec![Axis::periodic("t", 0.0)]).is_err());
        assert!(Chart::new(vec![Axis::bounded("x", 1.0, 1.0)]).is_err());
        assert!(Chart::new(vec![Axis::bounded("x", 0.0, 1.0), Axis::bounded("x", 0.0, 1.0)]).is_err());
        assert!(Chart::new((0..7).map(|i| Axis::bounded(&format!("a{i}"), 0.0, 1.0)).collect()).is_err());
    }

    #[test]
    fn reduces_periodic_axes() {
        let c = torus();
        assert_eq!(c.reduce(&[1.25, 0.5]), vec![0.25, 0.5]);
        assert_eq!(c.reduce(&[-0.25, 0.5]), vec![0.75, 0.5]);
        assert!(c.locate(&[0.0, 1.5]).is_err());
        let d = c.displacement(&[0.95, 0.0], &[0.05, 0.5]);
        assert!((d[0] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn grid_enumerates_in_order() {
        let c = torus();
        let g = Grid::uniform(2, 3);
        let pts = g.points(&c).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!(pts[0], vec![0.0, -1.0]);
        assert_eq!(pts[1], vec![0.0, 0.0]);
        assert_eq!(pts[3][0], 1.0 / 3.0);
        let six = Chart::new((0..6).map(|i| Axis::bounded(&format!("a{i}"), 0.0, 1.0)).collect()).unwrap();
        assert_eq!(Grid::default_for(&six).axes[0], AxisSamples::Count { n: 10 });
        assert_eq!(Grid::default_for(&c).len(), 289);
        let big = Grid::uniform(2, 1001);
        assert!(matches!(big.points(&c), Err(Error::GridTooLarge { .. })));
    }
}
