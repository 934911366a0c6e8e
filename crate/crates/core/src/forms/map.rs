use std::sync::Arc;

use super::chart::Chart;
use super::expr::Expr;
use super::form::{mask_indices, DifferentialForm};
use crate::error::{Error, Result};
use crate::tolerance::Tier;

/// Smooth map between charts given by target coordinates as expressions in
/// the source coordinates.
#[derive(Clone, Debug)]
pub struct ChartMap {
    source: Arc<Chart>,
    target: Arc<Chart>,
    comps: Vec<Expr>,
}

fn symbolic_det(m: &[Vec<Expr>]) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        n => {
            let mut acc = Expr::zero();
            for c in 0..n {
                if m[0][c].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(k, _)| *k != c)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][c].mul(&symbolic_det(&minor));
                acc = if c % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

impl ChartMap {
    pub fn new(source: Arc<Chart>, target: Arc<Chart>, comps: Vec<Expr>) -> Result<Self> {
        if comps.len() != target.dim() {
            return Err(Error::Arity {
                expected: target.dim(),
                got: comps.len(),
            });
        }
        if let Some(v) = comps.iter().filter_map(|c| c.max_var()).max() {
            if v >= source.dim() {
                return Err(Error::ChartMismatch(format!(
                    "map component references coordinate {v} of a {}-dimensional chart",
                    source.dim()
                )));
            }
        }
        Ok(Self {
            source,
            target,
            comps,
        })
    }

    pub fn identity(chart: Arc<Chart>) -> Self {
        let comps = (0..chart.dim()).map(Expr::var).collect();
        Self {
            source: chart.clone(),
            target: chart,
            comps,
        }
    }

    pub fn source(&self) -> &Arc<Chart> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Chart> {
        &self.target
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn apply(&self, p: &[f64]) -> Result<Vec<f64>> {
        let q = self.source.locate(p)?;
        let image: Vec<f64> = self.comps.iter().map(|c| c.eval(&q)).collect();
        Ok(self.target.reduce(&image))
    }

    /// `J[i][j] = d(target_i)/d(source_j)`.
    pub fn jacobian(&self) -> Vec<Vec<Expr>> {
        self.comps
            .iter()
            .map(|c| (0..self.source.dim()).map(|j| c.diff(j)).collect())
            .collect()
    }

    pub fn jacobian_at(&self, p: &[f64]) -> Vec<Vec<f64>> {
        self.jacobian()
            .iter()
            .map(|row| row.iter().map(|e| e.eval(p)).collect())
            .collect()
    }

    /// `other . self`.
    pub fn then(&self, other: &ChartMap) -> Result<ChartMap> {
        if self.target.dim() != other.source.dim() {
            return Err(Error::ChartMismatch("composition dimension mismatch".into()));
        }
        ChartMap::new(
            self.source.clone(),
            other.target.clone(),
            other.comps.iter().map(|c| c.substitute(&self.comps)).collect(),
        )
    }

    pub fn tier(&self) -> Tier {
        self.comps.iter().fold(Tier::Exact, |t, c| t.join(c.tier()))
    }

    /// Pullback of a form on the target chart.
    pub fn pullback(&self, form: &DifferentialForm) -> Result<DifferentialForm> {
        if form.chart().dim() != self.target.dim() || **form.chart() != *self.target {
            return Err(Error::ChartMismatch("form does not live on the map target".into()));
        }
        let k = form.degree();
        let n = self.source.dim();
        if k > n {
            return Ok(DifferentialForm::zero(self.source.clone(), k));
        }
        let jac = self.jacobian();
        let source_tuples: Vec<Vec<usize>> = (0u16..(1 << n))
            .map(|m| m as u8)
            .filter(|m| m.count_ones() as usize == k)
            .map(mask_indices)
            .collect();
        let mut terms = Vec::new();
        for (rows, coeff) in form.terms() {
            let pulled = coeff.substitute(&self.comps);
            for cols in &source_tuples {
                let minor: Vec<Vec<Expr>> = rows
                    .iter()
                    .map(|&r| cols.iter().map(|&c| jac[r][c].clone()).collect())
                    .collect();
                let d = symbolic_det(&minor);
                if d.is_zero() {
                    continue;
                }
                terms.push((cols.clone(), pulled.mul(&d)));
            }
        }
        DifferentialForm::from_terms(self.source.clone(), k, terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::chart::Axis;
    use std::f64::consts::PI;

    #[test]
    fn polar_pullback_of_area_form() {
        let polar = Arc::new(
            Chart::new(vec![Axis::bounded("r", 1e-6, 2.0), Axis::periodic("theta", 2.0 * PI)]).unwrap(),
        );
        let plane = Arc::new(
            Chart::new(vec![Axis::bounded("x", -2.0, 2.0), Axis::bounded("y", -2.0, 2.0)]).unwrap(),
        );
        let r = Expr::var(0);
        let th = Expr::var(1);
        let map = ChartMap::new(polar, plane.clone(), vec![r.mul(&th.cos()), r.mul(&th.sin())]).unwrap();
        let area = DifferentialForm::volume(plane.clone(), 1.0);
        let pulled = map.pullback(&area).unwrap();
        let p = [0.8, 1.1];
        assert!((pulled.component(&[0, 1]).eval(&p) - 0.8).abs() < 1e-14);

        // x dy - y dx pulls back to r^2 dtheta
        let rot = DifferentialForm::one_form(plane, vec![Expr::var(1).neg(), Expr::var(0)]).unwrap();
        let pr = map.pullback(&rot).unwrap();
        assert!(pr.component(&[0]).eval(&p).abs() < 1e-14);
        assert!((pr.component(&[1]).eval(&p) - 0.64).abs() < 1e-14);
    }

    #[test]
    fn pullback_commutes_with_d() {
        let c = Arc::new(
            Chart::new(vec![
                Axis::bounded("a", -1.0, 1.0),
                Axis::bounded("b", -1.0, 1.0),
                Axis::bounded("c", -1.0, 1.0),
            ])
            .unwrap(),
        );
        let (a, b, cc) = (Expr::var(0), Expr::var(1), Expr::var(2));
        let map = ChartMap::new(c.clone(), c.clone(), vec![a.mul(&b), b.add(&cc.powi(3)), a.sin()]).unwrap();
        let w = DifferentialForm::one_form(c, vec![b.clone(), a.mul(&cc), cc.exp()]).unwrap();
        let lhs = map.pullback(&w.d()).unwrap();
        let rhs = map.pullback(&w).unwrap().d();
        let p = [0.3, -0.4, 0.7];
        for idx in [[0usize, 1], [0, 2], [1, 2]] {
            let l = lhs.component(&idx).eval(&p);
            let r = rhs.component(&idx).eval(&p);
            assert!((l - r).abs() < 1e-12, "{idx:?}: {l} vs {r}");
        }
    }
}
