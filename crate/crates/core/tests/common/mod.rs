//! Random fixtures shared by the property and acceptance suites.
#![allow(dead_code)]

use std::sync::Arc;

use foliated_contact::tolerance::{EXACT_TOL, FD_TOL};
use foliated_contact::forms::{Axis, Chart, ChartMap, DifferentialForm, Expr, VectorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `[-1, 1]^dim` with axes `x0, x1, ...`.
pub fn cube(dim: usize) -> Arc<Chart> {
    Arc::new(Chart::new((0..dim).map(|i| Axis::bounded(&format!("x{i}"), -1.0, 1.0)).collect()).unwrap())
}

/// Random smooth coefficient: a low-degree polynomial plus a trig term.
pub fn coeff(rng: &mut ChaCha8Rng, dim: usize) -> Expr {
    let mut e = Expr::constant(rng.random_range(-1.0..1.0));
    for _ in 0..3 {
        let mut m = Expr::constant(rng.random_range(-1.0..1.0));
        for _ in 0..rng.random_range(1..=2) {
            m = m.mul(&Expr::var(rng.random_range(0..dim)));
        }
        e = e.add(&m);
    }
    let i = rng.random_range(0..dim);
    let w = rng.random_range(0.5..2.0);
    let trig = Expr::var(i).scale(w);
    let trig = if rng.random_bool(0.5) { trig.sin() } else { trig.cos() };
    e.add(&trig.scale(rng.random_range(-1.0..1.0)))
}

fn subsets(dim: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << dim)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..dim).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

pub fn form(rng: &mut ChaCha8Rng, chart: &Arc<Chart>, k: usize) -> DifferentialForm {
    let dim = chart.dim();
    let mut terms = Vec::new();
    for idx in subsets(dim, k) {
        if rng.random_bool(0.7) {
            terms.push((idx, coeff(rng, dim)));
        }
    }
    DifferentialForm::from_terms(chart.clone(), k, terms).unwrap()
}

pub fn field(rng: &mut ChaCha8Rng, chart: &Arc<Chart>) -> VectorField {
    let dim = chart.dim();
    VectorField::new(chart.clone(), (0..dim).map(|_| coeff(rng, dim).scale(0.5)).collect()).unwrap()
}

pub fn point(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-radius..radius)).collect()
}

/// Map of the cube into itself: `x_i + 0.1 * small_i(x)`, bounded by 0.5
/// away from the boundary when evaluated on `[-0.5, 0.5]^dim`.
pub fn self_map(rng: &mut ChaCha8Rng, chart: &Arc<Chart>) -> ChartMap {
    let dim = chart.dim();
    let comps = (0..dim)
        .map(|i| Expr::var(i).scale(0.5).add(&coeff(rng, dim).scale(0.05)))
        .collect();
    ChartMap::new(chart.clone(), chart.clone(), comps).unwrap()
}

/// Largest coefficient gap between two forms at `p`.
pub fn gap(a: &DifferentialForm, b: &DifferentialForm, p: &[f64]) -> f64 {
    let diff = a.sub(b).unwrap();
    diff.max_abs_at(p)
}

/// Largest coefficient of `a` at `p` (used to scale tolerances).
pub fn size(a: &DifferentialForm, p: &[f64]) -> f64 {
    a.max_abs_at(p)
}

/// Lie derivative oracle: central difference in `t` of the flow pullback,
/// with the flow from RK4 on a fine step and `D phi_t` from central
/// differences of the flow in the initial point.
pub fn lie_oracle(a: &DifferentialForm, x: &VectorField, p: &[f64]) -> Vec<(Vec<usize>, f64)> {
    let dim = p.len();
    let k = a.degree();
    let flow = |q: &[f64], t: f64| -> Vec<f64> {
        let steps = 40;
        let h = t / steps as f64;
        let mut y = q.to_vec();
        let f = |y: &[f64]| x.eval_unchecked(y);
        for _ in 0..steps {
            let k1 = f(&y);
            let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, b)| a + 0.5 * h * b).collect();
            let k2 = f(&y2);
            let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, b)| a + 0.5 * h * b).collect();
            let k3 = f(&y3);
            let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, b)| a + h * b).collect();
            let k4 = f(&y4);
            for i in 0..y.len() {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        y
    };
    let pulled = |t: f64, idx: &[usize]| -> f64 {
        let off = 1e-5;
        let vectors: Vec<Vec<f64>> = idx
            .iter()
            .map(|&j| {
                let mut up = p.to_vec();
                let mut dn = p.to_vec();
                up[j] += off;
                dn[j] -= off;
                let (fu, fd) = (flow(&up, t), flow(&dn, t));
                fu.iter().zip(&fd).map(|(u, d)| (u - d) / (2.0 * off)).collect()
            })
            .collect();
        a.evaluate_unchecked(&flow(p, t), &vectors)
    };
    let t = 1e-3;
    subsets(dim, k)
        .into_iter()
        .map(|idx| {
            let v = (pulled(t, &idx) - pulled(-t, &idx)) / (2.0 * t);
            (idx, v)
        })
        .collect()
}

fn tol(scale: f64, base: f64) -> f64 {
    base * scale.max(1.0)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(msg()) }
}

/// `d(d a) = 0` for a random `k`-form.
pub fn check_d_squared(seed: u64, dim: usize, k: usize) -> Result<(), String> {
    let mut g = rng(seed);
    let chart = cube(dim);
    let a = form(&mut g, &chart, k.min(dim));
    let da = a.d();
    let dd = da.d();
    for _ in 0..5 {
        let p = point(&mut g, dim, 1.0);
        let v = dd.max_abs_at(&p);
        ensure(v <= tol(size(&da, &p), EXACT_TOL), || format!("|dd a| = {v:e} at {p:?}"))?;
    }
    Ok(())
}

/// `a ^ b = (-1)^{kl} b ^ a`.
pub fn check_graded_commutativity(seed: u64, dim: usize, k: usize, l: usize) -> Result<(), String> {
    let mut g = rng(seed);
    let chart = cube(dim);
    let k = k.min(dim);
    let l = l.min(dim - k);
    let a = form(&mut g, &chart, k);
    let b = form(&mut g, &chart, l);
    let ab = a.wedge(&b).map_err(|e| e.to_string())?;
    let ba = b.wedge(&a).map_err(|e| e.to_string())?;
    let ba = if (k * l) % 2 == 1 { ba.neg() } else { ba };
    for _ in 0..5 {
        let p = point(&mut g, dim, 1.0);
        let v = gap(&ab, &ba, &p);
        ensure(v <= tol(size(&ab, &p), EXACT_TOL), || format!("gap {v:e} at {p:?}"))?;
    }
    Ok(())
}

/// `d(a ^ b) = da ^ b + (-1)^k a ^ db`.
pub fn check_leibniz(seed: u64, dim: usize, k: usize, l: usize) -> Result<(), String> {
    let mut g = rng(seed);
    let chart = cube(dim);
    let k = k.min(dim - 1);
    let l = l.min(dim - 1 - k);
    let a = form(&mut g, &chart, k);
    let b = form(&mut g, &chart, l);
    let lhs = a.wedge(&b).unwrap().d();
    let second = a.wedge(&b.d()).unwrap();
    let second = if k % 2 == 1 { second.neg() } else { second };
    let rhs = a.d().wedge(&b).unwrap().add(&second).unwrap();
    for _ in 0..5 {
        let p = point(&mut g, dim, 1.0);
        let v = gap(&lhs, &rhs, &p);
        ensure(v <= tol(size(&lhs, &p), 1e3 * EXACT_TOL), || format!("gap {v:e} at {p:?}"))?;
    }
    Ok(())
}

/// Cartan-formula Lie derivative against the flow-pullback oracle.
pub fn check_cartan(seed: u64, dim: usize, k: usize) -> Result<(), String> {
    let mut g = rng(seed);
    let chart = cube(dim);
    let a = form(&mut g, &chart, k.min(dim));
    let x = field(&mut g, &chart);
    let lie = a.lie(&x).map_err(|e| e.to_string())?;
    let p = point(&mut g, dim, 0.5);
    for (idx, v) in lie_oracle(&a, &x, &p) {
        let got = lie.component(&idx).eval(&p);
        ensure((got - v).abs() <= tol(v.abs(), FD_TOL), || format!("{idx:?}: {got} vs oracle {v}"))?;
    }
    Ok(())
}

/// `(m2 . m1)^* = m1^* m2^*` and `m^* d = d m^*`.
pub fn check_pullback_functoriality(seed: u64, dim: usize, k: usize) -> Result<(), String> {
    let mut g = rng(seed);
    let chart = cube(dim);
    let a = form(&mut g, &chart, k.min(dim));
    let m1 = self_map(&mut g, &chart);
    let m2 = self_map(&mut g, &chart);
    let composed = m1.then(&m2).unwrap().pullback(&a).unwrap();
    let stepwise = m1.pullback(&m2.pullback(&a).unwrap()).unwrap();
    let natural_l = m1.pullback(&a.d()).unwrap();
    let natural_r = m1.pullback(&a).unwrap().d();
    for _ in 0..4 {
        let p = point(&mut g, dim, 0.5);
        let v = gap(&composed, &stepwise, &p);
        ensure(v <= tol(size(&composed, &p), 1e3 * EXACT_TOL), || format!("composition gap {v:e} at {p:?}"))?;
        let v = gap(&natural_l, &natural_r, &p);
        ensure(v <= tol(size(&natural_l, &p), 1e3 * EXACT_TOL), || format!("naturality gap {v:e} at {p:?}"))?;
    }
    Ok(())
}

/// Symbolic pullback against `a_{m(p)}(J e_I)`.
pub fn check_pullback_pointwise(seed: u64, dim: usize, k: usize) -> Result<(), String> {
    let mut g = rng(seed);
    let chart = cube(dim);
    let a = form(&mut g, &chart, k.min(dim));
    let m = self_map(&mut g, &chart);
    let pulled = m.pullback(&a).unwrap();
    let p = point(&mut g, dim, 0.5);
    let image = m.apply(&p).unwrap();
    let jac = m.jacobian_at(&p);
    for (idx, v) in pulled.components_at(&p) {
        let vectors: Vec<Vec<f64>> = idx.iter().map(|&j| jac.iter().map(|row| row[j]).collect()).collect();
        let expected = a.evaluate_unchecked(&image, &vectors);
        ensure((v - expected).abs() <= tol(expected.abs(), 1e2 * EXACT_TOL), || format!("{idx:?}: {v} vs {expected}"))?;
    }
    Ok(())
}

/// `i_X (a ^ b) = i_X a ^ b + (-1)^k a ^ i_X b`.
pub fn check_interior_leibniz(seed: u64, dim: usize, k: usize, l: usize) -> Result<(), String> {
    let mut g = rng(seed);
    let chart = cube(dim);
    let k = k.clamp(1, dim - 1);
    let l = l.clamp(1, dim - k);
    let a = form(&mut g, &chart, k);
    let b = form(&mut g, &chart, l);
    let x = field(&mut g, &chart);
    let lhs = a.wedge(&b).unwrap().interior(&x).unwrap();
    let second = a.wedge(&b.interior(&x).unwrap()).unwrap();
    let second = if k % 2 == 1 { second.neg() } else { second };
    let rhs = a.interior(&x).unwrap().wedge(&b).unwrap().add(&second).unwrap();
    for _ in 0..5 {
        let p = point(&mut g, dim, 1.0);
        let v = gap(&lhs, &rhs, &p);
        ensure(v <= tol(size(&lhs, &p), 1e2 * EXACT_TOL), || format!("gap {v:e} at {p:?}"))?;
    }
    Ok(())
}
