//! Differential forms with expression coefficients.
//!
//! Components live on strictly increasing index tuples, encoded as bitmasks
//! (bit `i` set means `dx_i` is present). Every sign in wedge, interior
//! product and exterior derivative comes from permutation parity of the
//! masks, so no redundant antisymmetric storage is kept.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::chart::Chart;
use super::expr::Expr;
use super::field::{ScalarField, VectorField};
use crate::error::{Error, Result};
use crate::tolerance::Tier;

pub(crate) fn same_chart(a: &Arc<Chart>, b: &Arc<Chart>) -> Result<()> {
    if Arc::ptr_eq(a, b) || a == b {
        Ok(())
    } else {
        Err(Error::ChartMismatch(format!(
            "{:?} vs {:?}",
            a.axis_names(),
            b.axis_names()
        )))
    }
}

pub(crate) fn mask_indices(mask: u8) -> Vec<usize> {
    (0..8).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign of `dx^I ^ dx^J` relative to `dx^(I|J)`: parity of inversions.
fn shuffle_sign(i: u8, j: u8) -> f64 {
    let mut inversions = 0;
    for a in mask_indices(i) {
        inversions += (j & ((1u16 << a) as u8).wrapping_sub(1)).count_ones();
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Determinant of a small dense matrix (partial pivoting).
pub(crate) fn det(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut d = 1.0;
    for c in 0..n {
        let piv = (c..n)
            .max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
            .unwrap();
        if m[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            m.swap(piv, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            if f != 0.0 {
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    d
}

#[derive(Clone, Debug)]
pub struct DifferentialForm {
    chart: Arc<Chart>,
    degree: usize,
    comps: BTreeMap<u8, Expr>,
}

impl DifferentialForm {
    pub fn zero(chart: Arc<Chart>, degree: usize) -> Self {
        Self {
            chart,
            degree,
            comps: BTreeMap::new(),
        }
    }

    pub fn scalar(chart: Arc<Chart>, f: Expr) -> Self {
        let mut form = Self::zero(chart, 0);
        form.insert(0, f);
        form
    }

    /// `dx_i`.
    pub fn coordinate(chart: Arc<Chart>, i: usize) -> Self {
        let mut form = Self::zero(chart, 1);
        form.insert(1 << i, Expr::one());
        form
    }

    /// 1-form `sum_i coeffs[i] dx_i`.
    pub fn one_form(chart: Arc<Chart>, coeffs: Vec<Expr>) -> Result<Self> {
        if coeffs.len() != chart.dim() {
            return Err(Error::Arity {
                expected: chart.dim(),
                got: coeffs.len(),
            });
        }
        let mut form = Self::zero(chart, 1);
        for (i, c) in coeffs.into_iter().enumerate() {
            form.insert(1 << i, c);
        }
        Ok(form)
    }

    /// Build from arbitrary index tuples; unsorted tuples are reordered with
    /// the permutation sign and repeated indices contribute nothing.
    pub fn from_terms(chart: Arc<Chart>, degree: usize, terms: Vec<(Vec<usize>, Expr)>) -> Result<Self> {
        if degree > chart.dim() {
            return Err(Error::InvalidDegree {
                op: "construct",
                degree,
                dim: chart.dim(),
            });
        }
        let mut form = Self::zero(chart.clone(), degree);
        for (idx, coeff) in terms {
            if idx.len() != degree || idx.iter().any(|&i| i >= chart.dim()) {
                return Err(Error::InvalidDegree {
                    op: "construct",
                    degree: idx.len(),
                    dim: chart.dim(),
                });
            }
            let mut sorted = idx.clone();
            let mut sign = 1.0;
            for a in 0..sorted.len() {
                for b in 0..sorted.len() - 1 - a {
                    if sorted[b] > sorted[b + 1] {
                        sorted.swap(b, b + 1);
                        sign = -sign;
                    }
                }
            }
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                continue;
            }
            let mask = sorted.iter().fold(0u8, |m, &i| m | (1 << i));
            form.insert(mask, coeff.scale(sign));
        }
        Ok(form)
    }

    /// Volume form `dx_0 ^ ... ^ dx_(n-1)` scaled by `sign`.
    pub fn volume(chart: Arc<Chart>, sign: f64) -> Self {
        let dim = chart.dim();
        let mut form = Self::zero(chart, dim);
        form.insert(((1u16 << dim) - 1) as u8, Expr::constant(sign));
        form
    }

    fn insert(&mut self, mask: u8, coeff: Expr) {
        let merged = match self.comps.remove(&mask) {
            Some(prev) => prev.add(&coeff),
            None => coeff,
        };
        if !merged.is_zero() {
            self.comps.insert(mask, merged);
        }
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Coefficient on a strictly increasing index tuple.
    pub fn component(&self, indices: &[usize]) -> Expr {
        let mask = indices.iter().fold(0u8, |m, &i| m | (1 << i));
        self.comps.get(&mask).cloned().unwrap_or_else(Expr::zero)
    }

    /// Nonzero components as (increasing indices, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (Vec<usize>, &Expr)> {
        self.comps.iter().map(|(&m, e)| (mask_indices(m), e))
    }

    pub fn tier(&self) -> Tier {
        self.comps.values().fold(Tier::Exact, |t, e| t.join(e.tier()))
    }

    pub fn add(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        same_chart(&self.chart, &other.chart)?;
        if self.degree != other.degree {
            return Err(Error::InvalidDegree {
                op: "add",
                degree: other.degree,
                dim: self.chart.dim(),
            });
        }
        let mut out = self.clone();
        for (&m, e) in &other.comps {
            out.insert(m, e.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> DifferentialForm {
        self.scale(&Expr::constant(-1.0))
    }

    /// Multiply by a function.
    pub fn scale(&self, f: &Expr) -> DifferentialForm {
        let mut out = Self::zero(self.chart.clone(), self.degree);
        for (&m, e) in &self.comps {
            out.insert(m, f.mul(e));
        }
        out
    }

    pub fn wedge(&self, other: &DifferentialForm) -> Result<DifferentialForm> {
        same_chart(&self.chart, &other.chart)?;
        let dim = self.chart.dim();
        if self.degree + other.degree > dim {
            return Err(Error::DegreeOverflow {
                left: self.degree,
                right: other.degree,
                dim,
            });
        }
        let mut out = Self::zero(self.chart.clone(), self.degree + other.degree);
        for (&i, a) in &self.comps {
            for (&j, b) in &other.comps {
                if i & j != 0 {
                    continue;
                }
                out.insert(i | j, a.mul(b).scale(shuffle_sign(i, j)));
            }
        }
        Ok(out)
    }

    /// Exterior derivative. Degree-`dim` input yields the zero form.
    pub fn d(&self) -> DifferentialForm {
        let dim = self.chart.dim();
        let mut out = Self::zero(self.chart.clone(), self.degree + 1);
        if self.degree >= dim {
            return out;
        }
        for (&m, a) in &self.comps {
            for j in 0..dim {
                if m & (1 << j) != 0 {
                    continue;
                }
                let da = a.diff(j);
                if da.is_zero() {
                    continue;
                }
                let before = (m & ((1u16 << j) as u8).wrapping_sub(1)).count_ones();
                let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
                out.insert(m | (1 << j), da.scale(sign));
            }
        }
        out
    }

    /// Interior product `i_X a`.
    pub fn interior(&self, x: &VectorField) -> Result<DifferentialForm> {
        same_chart(&self.chart, x.chart())?;
        if self.degree == 0 {
            return Err(Error::InvalidDegree {
                op: "interior product",
                degree: 0,
                dim: self.chart.dim(),
            });
        }
        let mut out = Self::zero(self.chart.clone(), self.degree - 1);
        for (&m, a) in &self.comps {
            for (pos, i) in mask_indices(m).into_iter().enumerate() {
                let xi = x.component(i);
                if xi.is_zero() {
                    continue;
                }
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                out.insert(m & !(1 << i), xi.mul(a).scale(sign));
            }
        }
        Ok(out)
    }

    /// Lie derivative by the Cartan formula `L_X = i_X d + d i_X`.
    pub fn lie(&self, x: &VectorField) -> Result<DifferentialForm> {
        let first = self.d().interior(x);
        let first = match first {
            Ok(f) => f,
            // degree-dim forms: d a = 0 and i_X of the zero (dim+1)-form is zero
            Err(_) if self.degree == self.chart.dim() => Self::zero(self.chart.clone(), self.degree),
            Err(e) => return Err(e),
        };
        if self.degree == 0 {
            return Ok(first);
        }
        first.add(&self.interior(x)?.d())
    }

    /// Coefficient of a 0-form as a scalar field.
    pub fn as_scalar(&self) -> Option<ScalarField> {
        (self.degree == 0).then(|| ScalarField::new(self.chart.clone(), self.component(&[])))
    }

    /// Component values at an already-reduced point.
    pub fn components_at(&self, p: &[f64]) -> Vec<(Vec<usize>, f64)> {
        self.comps
            .iter()
            .map(|(&m, e)| (mask_indices(m), e.eval(p)))
            .collect()
    }

    /// Dense coefficient vector of a 1-form at `p` (no domain check).
    pub fn covector_at(&self, p: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.chart.dim()];
        for (&m, e) in &self.comps {
            v[m.trailing_zeros() as usize] = e.eval(p);
        }
        v
    }

    /// Antisymmetric matrix `M[i][j] = a(e_i, e_j)` of a 2-form at `p`.
    pub fn matrix_at(&self, p: &[f64]) -> Vec<Vec<f64>> {
        let n = self.chart.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (&mask, e) in &self.comps {
            let idx = mask_indices(mask);
            let v = e.eval(p);
            m[idx[0]][idx[1]] = v;
            m[idx[1]][idx[0]] = -v;
        }
        m
    }

    /// Coefficient of a top-degree form at `p`.
    pub fn top_at(&self, p: &[f64]) -> f64 {
        self.comps.values().next().map(|e| e.eval(p)).unwrap_or(0.0)
    }

    /// Largest |value| on coordinate frames at `p`.
    pub fn max_abs_at(&self, p: &[f64]) -> f64 {
        self.comps
            .values()
            .map(|e| e.eval(p).abs())
            .fold(0.0, f64::max)
    }

    /// Alternating multilinear value at `p` on `vectors` (periodic
    /// coordinates reduced, bounded axes checked).
    pub fn evaluate(&self, p: &[f64], vectors: &[Vec<f64>]) -> Result<f64> {
        let q = self.chart.locate(p)?;
        if vectors.len() != self.degree {
            return Err(Error::Arity {
                expected: self.degree,
                got: vectors.len(),
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.chart.dim()) {
            return Err(Error::Arity {
                expected: self.chart.dim(),
                got: v.len(),
            });
        }
        Ok(self.evaluate_unchecked(&q, vectors))
    }

    pub fn evaluate_unchecked(&self, p: &[f64], vectors: &[Vec<f64>]) -> f64 {
        if self.degree > self.chart.dim() {
            return 0.0;
        }
        let mut total = 0.0;
        for (&m, e) in &self.comps {
            let idx = mask_indices(m);
            let minor: Vec<Vec<f64>> = idx
                .iter()
                .map(|&i| vectors.iter().map(|v| v[i]).collect())
                .collect();
            let d = if idx.is_empty() { 1.0 } else { det(minor) };
            if d != 0.0 {
                total += e.eval(p) * d;
            }
        }
        total
    }

    /// Rebuild on another chart with the same dimension (coefficients unchanged).
    pub fn on_chart(&self, chart: Arc<Chart>) -> Result<DifferentialForm> {
        if chart.dim() != self.chart.dim() {
            return Err(Error::ChartMismatch("dimension differs".into()));
        }
        Ok(Self {
            chart,
            degree: self.degree,
            comps: self.comps.clone(),
        })
    }

    /// Embed into `target` with axis `i` of self mapped to `axis_map[i]`.
    /// Coefficients are re-expressed in the target coordinates.
    pub fn embed(&self, target: Arc<Chart>, axis_map: &[usize]) -> DifferentialForm {
        let mut out = Self::zero(target, self.degree);
        for (&m, e) in &self.comps {
            let new_mask = mask_indices(m)
                .iter()
                .fold(0u8, |acc, &i| acc | (1 << axis_map[i]));
            let reindexed: Vec<usize> = mask_indices(m).iter().map(|&i| axis_map[i]).collect();
            let mut sorted = reindexed.clone();
            sorted.sort_unstable();
            let mut sign = 1.0;
            let mut perm = reindexed;
            for a in 0..perm.len() {
                for b in 0..perm.len().saturating_sub(1 + a) {
                    if perm[b] > perm[b + 1] {
                        perm.swap(b, b + 1);
                        sign = -sign;
                    }
                }
            }
            out.insert(new_mask, e.reindex(axis_map).scale(sign));
        }
        out
    }

    /// Restriction to the slice `x[axis] = value`, living on `target` (the
    /// chart without that axis).
    pub fn restrict(&self, axis: usize, value: f64, target: Arc<Chart>) -> Result<DifferentialForm> {
        let dim = self.chart.dim();
        if target.dim() + 1 != dim || axis >= dim {
            return Err(Error::ChartMismatch("restriction target must drop exactly one axis".into()));
        }
        if self.degree > target.dim() {
            return Ok(Self::zero(target, self.degree));
        }
        let args: Vec<Expr> = (0..dim)
            .map(|i| match i.cmp(&axis) {
                std::cmp::Ordering::Less => Expr::var(i),
                std::cmp::Ordering::Equal => Expr::constant(value),
                std::cmp::Ordering::Greater => Expr::var(i - 1),
            })
            .collect();
        let mut out = Self::zero(target, self.degree);
        for (&m, e) in &self.comps {
            if m & (1 << axis) != 0 {
                continue;
            }
            let low = m & ((1u16 << axis) as u8).wrapping_sub(1);
            let high = (m >> (axis + 1)) << axis;
            out.insert(low | high, e.substitute(&args));
        }
        Ok(out)
    }

    /// Multi-line rendering using the chart's axis names.
    pub fn describe(&self) -> String {
        let names = self.chart.axis_names();
        if self.comps.is_empty() {
            return "0".into();
        }
        self.comps
            .iter()
            .map(|(&m, e)| {
                let basis = mask_indices(m)
                    .iter()
                    .map(|&i| format!("d{}", names[i]))
                    .collect::<Vec<_>>()
                    .join("^");
                if basis.is_empty() {
                    format!("{}", e.display(&names))
                } else {
                    format!("{} {}", e.display(&names), basis)
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::chart::Axis;
    use std::f64::consts::PI;

    fn chart3() -> Arc<Chart> {
        Arc::new(
            Chart::new(vec![
                Axis::bounded("r", 1e-6, 2.0),
                Axis::periodic("theta", 2.0 * PI),
                Axis::bounded("z", -1.0, 1.0),
            ])
            .unwrap(),
        )
    }

    #[test]
    fn shuffle_signs() {
        assert_eq!(shuffle_sign(0b001, 0b010), 1.0);
        assert_eq!(shuffle_sign(0b010, 0b001), -1.0);
        assert_eq!(shuffle_sign(0b100, 0b011), 1.0);
        assert_eq!(shuffle_sign(0b010, 0b101), -1.0);
    }

    #[test]
    fn dz_wedge_r2_dtheta() {
        let c = chart3();
        let dz = DifferentialForm::coordinate(c.clone(), 2);
        let r2dth = DifferentialForm::coordinate(c.clone(), 1).scale(&Expr::var(0).powi(2));
        let w = dz.wedge(&r2dth).unwrap();
        // r^2 dz ^ dtheta = -r^2 dtheta ^ dz
        let p = [0.7, 0.3, 0.1];
        let e = |i| {
            let mut v = vec![0.0; 3];
            v[i] = 1.0;
            v
        };
        assert!((w.evaluate(&p, &[e(2), e(1)]).unwrap() - 0.49).abs() < 1e-15);
        assert!((w.component(&[1, 2]).eval(&p) + 0.49).abs() < 1e-15);
    }

    #[test]
    fn exterior_derivative_of_standard_form() {
        let c = chart3();
        let alpha = DifferentialForm::one_form(c.clone(), vec![Expr::zero(), Expr::var(0).powi(2), Expr::one()]).unwrap();
        let da = alpha.d();
        assert_eq!(da.degree(), 2);
        assert_eq!(da.terms().count(), 1);
        let p = [0.7, 0.3, 0.1];
        assert!((da.component(&[0, 1]).eval(&p) - 1.4).abs() < 1e-15);
        assert!(da.d().is_zero());
        assert_eq!(da.tier(), Tier::Exact);
    }

    #[test]
    fn interior_of_dz() {
        let c = chart3();
        let alpha = DifferentialForm::one_form(c.clone(), vec![Expr::zero(), Expr::var(0).powi(2), Expr::one()]).unwrap();
        let dz = VectorField::coordinate(c.clone(), 2, 1.0);
        let i = alpha.interior(&dz).unwrap();
        assert_eq!(i.degree(), 0);
        assert_eq!(i.component(&[]).as_const(), Some(1.0));
        assert!(DifferentialForm::scalar(c, Expr::one()).interior(&dz).is_err());
    }

    #[test]
    fn degree_overflow_and_mismatch() {
        let c = chart3();
        let vol = DifferentialForm::volume(c.clone(), 1.0);
        let dr = DifferentialForm::coordinate(c.clone(), 0);
        assert!(matches!(vol.wedge(&dr), Err(Error::DegreeOverflow { .. })));
        assert!(vol.d().is_zero());
        let other = Arc::new(Chart::new(vec![Axis::bounded("x", 0.0, 1.0)]).unwrap());
        let dx = DifferentialForm::coordinate(other, 0);
        assert!(matches!(dr.wedge(&dx), Err(Error::ChartMismatch(_))));
    }

    #[test]
    fn from_terms_sorts_with_sign() {
        let c = chart3();
        let f = DifferentialForm::from_terms(c.clone(), 2, vec![(vec![2, 0], Expr::one()), (vec![1, 1], Expr::one())]).unwrap();
        assert_eq!(f.component(&[0, 2]).as_const(), Some(-1.0));
        assert_eq!(f.terms().count(), 1);
    }

    #[test]
    fn embed_preserves_values() {
        let c = chart3();
        let big = Arc::new(
            Chart::new(vec![
                Axis::bounded("t", 0.0, 1.0),
                Axis::bounded("r", 1e-6, 2.0),
                Axis::periodic("theta", 2.0 * PI),
                Axis::bounded("z", -1.0, 1.0),
            ])
            .unwrap(),
        );
        let alpha = DifferentialForm::one_form(c.clone(), vec![Expr::zero(), Expr::var(0).powi(2), Expr::one()]).unwrap();
        let w = alpha.wedge(&alpha.d()).unwrap();
        let e = w.embed(big, &[1, 2, 3]);
        let p = [0.5, 0.7, 0.3, 0.1];
        assert!((e.component(&[1, 2, 3]).eval(&p) - w.component(&[0, 1, 2]).eval(&p[1..])).abs() < 1e-15);
    }
}
