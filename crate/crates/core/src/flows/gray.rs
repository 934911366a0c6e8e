//! Moser-type flow conjugating a family of leafwise contact structures with
//! a common foliation.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::integrate::{inside_bounded, rk4_step, step_schedule, Trajectory};
use super::transport::{flow_differentials, neighbours, pushed_defect};
use crate::error::{Error, Result};
use crate::foliated::{finish, solve_arrays, FieldKind, FoliatedContactPair};
use crate::forms::{Axis, Chart, DifferentialForm, Expr, Grid};
use crate::linalg::kernel;
use crate::tolerance::{Tier, FLOW_FD_OFFSET};

/// How the parameter derivative of the family is obtained.
#[derive(Debug, Clone)]
pub enum AlphaDot {
    Exact(Vec<Expr>),
    /// Central difference in the parameter with this step.
    FiniteDifference(f64),
}

/// `s -> (beta, alpha_s)` with `alpha_s` given by coefficients in the base
/// coordinates followed by the parameter `s`.
#[derive(Debug, Clone)]
pub struct ContactFamily {
    base: Arc<Chart>,
    ext: Arc<Chart>,
    beta: DifferentialForm,
    orientation: DifferentialForm,
    alpha: DifferentialForm,
    d_alpha: DifferentialForm,
    alpha_dot: AlphaDot,
}

impl ContactFamily {
    /// `coeffs[i]` is the `dx_i` coefficient of `alpha_s`, an expression in
    /// the base coordinates and `s` (variable index `dim`).
    pub fn new(beta: DifferentialForm, orientation: DifferentialForm, coeffs: Vec<Expr>) -> Result<Self> {
        let base = beta.chart().clone();
        let n = base.dim();
        if coeffs.len() != n {
            return Err(Error::Arity {
                expected: n,
                got: coeffs.len(),
            });
        }
        let name = (0..)
            .map(|k| if k == 0 { "s".to_string() } else { format!("s{k}") })
            .find(|c| base.axis_index(c).is_none())
            .expect("unbounded search");
        let mut axes = base.axes().to_vec();
        axes.push(Axis::bounded(&name, -1.0, 2.0));
        let ext = Arc::new(Chart::new(axes)?);
        let mut full = coeffs.clone();
        full.push(Expr::zero());
        let alpha = DifferentialForm::one_form(ext.clone(), full)?;
        let d_alpha = alpha.d();
        let alpha_dot = AlphaDot::Exact(coeffs.iter().map(|c| c.diff(n)).collect());
        Ok(Self {
            base,
            ext,
            beta,
            orientation,
            alpha,
            d_alpha,
            alpha_dot,
        })
    }

    /// Use a central difference in `s` for the parameter derivative.
    pub fn with_fd_derivative(mut self, step: f64) -> Self {
        self.alpha_dot = AlphaDot::FiniteDifference(step);
        self
    }

    pub fn chart(&self) -> &Arc<Chart> {
        &self.base
    }

    /// Base chart extended by the parameter axis (last).
    pub fn parameter_chart(&self) -> &Arc<Chart> {
        &self.ext
    }

    pub fn beta(&self) -> &DifferentialForm {
        &self.beta
    }

    pub fn alpha_dot(&self) -> &AlphaDot {
        &self.alpha_dot
    }

    /// The member at parameter `s` as an (uncertified) pair.
    pub fn member(&self, s: f64) -> Result<FoliatedContactPair> {
        let n = self.base.dim();
        let alpha = self.alpha.restrict(n, s, self.base.clone())?;
        FoliatedContactPair::new(self.beta.clone(), alpha, self.orientation.clone())
    }

    fn ext_point(q: &[f64], s: f64) -> Vec<f64> {
        let mut e = q.to_vec();
        e.push(s);
        e
    }

    /// `(alpha_s, d alpha_s, d/ds alpha_s, beta)` at a reduced base point.
    fn local(&self, q: &[f64], s: f64) -> (Vec<f64>, Vec<Vec<f64>>, Vec<f64>, Vec<f64>) {
        let n = self.base.dim();
        let e = Self::ext_point(q, s);
        let mut a = self.alpha.covector_at(&e);
        a.truncate(n);
        let mut m = self.d_alpha.matrix_at(&e);
        m.truncate(n);
        for row in &mut m {
            row.truncate(n);
        }
        let adot = match &self.alpha_dot {
            AlphaDot::Exact(c) => c.iter().map(|c| c.eval(&e)).collect(),
            AlphaDot::FiniteDifference(h) => {
                let ap = self.alpha.covector_at(&Self::ext_point(q, s + h));
                let am = self.alpha.covector_at(&Self::ext_point(q, s - h));
                (0..n).map(|i| (ap[i] - am[i]) / (2.0 * h)).collect()
            }
        };
        (a, m, adot, self.beta.covector_at(q))
    }

    pub fn tier(&self) -> Tier {
        match self.alpha_dot {
            AlphaDot::Exact(_) => self.alpha.tier().join(self.beta.tier()),
            AlphaDot::FiniteDifference(_) => Tier::Fd,
        }
    }
}

/// Solution of the flow equations at one point and parameter.
#[derive(Debug, Clone)]
pub struct GrayVelocity {
    pub x: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub reeb: Vec<f64>,
    /// `|beta(X)|`.
    pub beta_x: f64,
    /// `|alpha_s(X)|`.
    pub alpha_x: f64,
    pub residual: f64,
}

/// `lambda = alpha_dot(R)`, then `X` in `xi_s` with
/// `i_X d alpha + alpha_dot - lambda alpha = mu beta`.
pub fn gray_velocity(family: &ContactFamily, p: &[f64], s: f64) -> Result<GrayVelocity> {
    let q = family.base.reduce(p);
    let n = q.len();
    let (a, m, adot, b) = family.local(&q, s);
    let reeb = solve_arrays(&q, &a, &b, &m, FieldKind::Reeb)?;
    let lambda: f64 = adot.iter().zip(&reeb.vector).map(|(x, y)| x * y).sum();
    let mut rows = Vec::with_capacity(n + 2);
    let mut rhs = Vec::with_capacity(n + 2);
    for j in 0..n {
        let mut row: Vec<f64> = (0..n).map(|i| m[i][j]).collect();
        row.push(-b[j]);
        rows.push(row);
        rhs.push(lambda * a[j] - adot[j]);
    }
    let mut ra = a.clone();
    ra.push(0.0);
    rows.push(ra);
    rhs.push(0.0);
    let mut rb = b.clone();
    rb.push(0.0);
    rows.push(rb);
    rhs.push(0.0);
    let sol = finish(q.clone(), rows, rhs, n)?;
    let dot = |w: &[f64]| w.iter().zip(&sol.vector).map(|(x, y)| x * y).sum::<f64>().abs();
    Ok(GrayVelocity {
        beta_x: dot(&b),
        alpha_x: dot(&a),
        x: sol.vector,
        lambda,
        mu: sol.c,
        reeb: reeb.vector,
        residual: sol.residual,
    })
}

/// One seed of the flow.
#[derive(Debug, Clone, Serialize)]
pub struct GrayFlowState {
    pub seed: Vec<f64>,
    /// Conformal factor at `s = 1`.
    pub g: f64,
    /// `lambda` at the endpoint.
    pub lambda: f64,
    pub trajectory: Trajectory,
    /// `ln g` at every trajectory sample.
    pub log_g: Vec<f64>,
    /// `lambda` at every trajectory sample.
    pub lambdas: Vec<f64>,
    /// Max `|beta(X)|` over every solve along the curve.
    pub max_beta_x: f64,
    /// Max `|alpha_s(X)|` over every solve along the curve.
    pub max_alpha_x: f64,
    pub max_residual: f64,
}

impl GrayFlowState {
    /// Largest gap between `lambda` and the central difference of `ln g`
    /// along the trajectory (interior samples on the uniform part).
    pub fn lambda_consistency(&self) -> f64 {
        let pts = &self.trajectory.points;
        let h = self.trajectory.step;
        let mut worst = 0.0f64;
        for i in 1..pts.len().saturating_sub(1) {
            let (t0, t2) = (pts[i - 1].0, pts[i + 1].0);
            if ((t2 - t0) - 2.0 * h).abs() > 1e-12 {
                continue;
            }
            let d = (self.log_g[i + 1] - self.log_g[i - 1]) / (2.0 * h);
            worst = worst.max((d - self.lambdas[i]).abs());
        }
        worst
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConjugationReport {
    pub tier: Tier,
    pub offset: f64,
    /// Per seed: sine of the largest principal angle between
    /// `D phi_1 (xi_0)` and `xi_1` at the endpoint.
    pub defects: Vec<f64>,
    pub max_defect: f64,
    pub max_beta_x: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrayFlowResult {
    pub states: Vec<GrayFlowState>,
    pub conjugation: ConjugationReport,
}

/// Parameters at which family members are certified before flowing.
const MEMBER_CHECKS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn flow_seed(family: &ContactFamily, seed: &[f64], step: f64) -> Result<GrayFlowState> {
    let chart = &family.base;
    let n = chart.dim();
    let start = chart.locate(seed)?;
    let steps = step_schedule(1.0, step)?;
    let stats = std::cell::Cell::new((0.0f64, 0.0f64, 0.0f64));
    let f = |y: &[f64], s: f64| -> Result<Vec<f64>> {
        let v = gray_velocity(family, &y[..n], s)?;
        let (b, a, r) = stats.get();
        stats.set((b.max(v.beta_x), a.max(v.alpha_x), r.max(v.residual)));
        let mut out = v.x;
        out.push(v.lambda);
        Ok(out)
    };
    let mut y = start.clone();
    y.push(0.0);
    let mut s = 0.0;
    let mut points = vec![(0.0, start.clone())];
    let mut log_g = vec![0.0];
    let mut lambdas = vec![gray_velocity(family, &start, 0.0)?.lambda];
    for (k, h) in steps.iter().enumerate() {
        let next = rk4_step(&f, &y, s, *h)?;
        if !inside_bounded(chart, &next[..n]) {
            return Err(Error::OutOfDomain {
                point: next[..n].to_vec(),
                axis: "gray flow left the chart".into(),
            });
        }
        let mut q = chart.reduce(&next[..n]);
        s = if k + 1 == steps.len() { 1.0 } else { (k + 1) as f64 * step };
        lambdas.push(gray_velocity(family, &q, s)?.lambda);
        log_g.push(next[n]);
        points.push((s, q.clone()));
        q.push(next[n]);
        y = q;
    }
    let (max_beta_x, max_alpha_x, max_residual) = stats.get();
    let ln_g = *log_g.last().unwrap();
    Ok(GrayFlowState {
        seed: start,
        g: ln_g.exp(),
        lambda: *lambdas.last().unwrap(),
        trajectory: Trajectory {
            points,
            step,
            method: "rk4",
            exited: false,
        },
        log_g,
        lambdas,
        max_beta_x,
        max_alpha_x,
        max_residual,
    })
}

/// Flow every seed over `s in [0, 1]` and measure the endpoint conjugation
/// defect with flow differentials from neighbouring seeds.
pub fn gray_flow(family: &ContactFamily, seeds: &[Vec<f64>], step: f64) -> Result<GrayFlowResult> {
    gray_flow_with_offset(family, seeds, step, FLOW_FD_OFFSET)
}

pub fn gray_flow_with_offset(family: &ContactFamily, seeds: &[Vec<f64>], step: f64, offset: f64) -> Result<GrayFlowResult> {
    let chart = family.base.clone();
    let n = chart.dim();
    let grid = Grid::default_for(&chart);
    for s in MEMBER_CHECKS {
        family.member(s)?.certify(&grid)?;
    }
    let per_seed: Vec<Result<(GrayFlowState, f64)>> = seeds
        .par_iter()
        .map(|seed| {
            let state = flow_seed(family, seed, step)?;
            let (up, down) = neighbours(&state.seed, offset);
            let run = |q: &Vec<f64>| flow_seed(family, q, step).map(|st| st.trajectory);
            let plus = up.iter().map(run).collect::<Result<Vec<_>>>()?;
            let minus = down.iter().map(run).collect::<Result<Vec<_>>>()?;
            let len = state.trajectory.points.len();
            let jac = flow_differentials(&chart, &plus, &minus, offset, len)?.pop().unwrap();
            let xi = |q: &[f64], s: f64| {
                let (a, _, _, b) = family.local(q, s);
                kernel(&[a, b], n, n - 2).0
            };
            let defect = pushed_defect(&jac, &xi(&state.seed, 0.0), &xi(state.trajectory.end(), 1.0));
            Ok((state, defect))
        })
        .collect();
    let mut states = Vec::with_capacity(per_seed.len());
    let mut defects = Vec::with_capacity(per_seed.len());
    for r in per_seed {
        let (st, d) = r?;
        states.push(st);
        defects.push(d);
    }
    let max_defect = defects.iter().copied().fold(0.0, f64::max);
    let max_beta_x = states.iter().map(|s| s.max_beta_x).fold(0.0, f64::max);
    Ok(GrayFlowResult {
        states,
        conjugation: ConjugationReport {
            tier: Tier::Fd,
            offset,
            defects,
            max_defect,
            max_beta_x,
        },
    })
}
