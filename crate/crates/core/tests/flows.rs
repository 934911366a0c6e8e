use std::f64::consts::TAU;
use std::sync::Arc;

use foliated_contact::flows::{
    gray_flow, gray_velocity, integrate_flow, mapping_torus_lift, parallel_transport, parallel_transport_with_offset,
    ContactFamily,
};
use foliated_contact::forms::{parse_expr, Axis, Chart, DifferentialForm, Expr, ScalarField, VectorField};
use foliated_contact::models::{box_leaf_chart, mapping_torus_leaf, mapping_torus_model, standard_local_model};

fn rotation() -> VectorField {
    let chart = Arc::new(Chart::new(vec![Axis::bounded("x", -2.0, 2.0), Axis::bounded("y", -2.0, 2.0)]).unwrap());
    VectorField::new(chart, vec![Expr::var(1).neg(), Expr::var(0)]).unwrap()
}

fn rotation_error(step: f64) -> f64 {
    let tr = integrate_flow(&rotation(), &[1.0, 0.0], 1.0, step).unwrap();
    let end = tr.end();
    (end[0] - 1f64.cos()).hypot(end[1] - 1f64.sin())
}

#[test]
fn rk4_error_ratio_on_rotation_is_fourth_order() {
    let (coarse, fine) = (rotation_error(0.1), rotation_error(0.05));
    let ratio = coarse / fine;
    assert!((8.0..=32.0).contains(&ratio), "ratio {ratio} ({coarse:e} / {fine:e})");
}

fn h_field(src: &str) -> ScalarField {
    let chart = box_leaf_chart();
    ScalarField::new(chart.clone(), parse_expr(src, &chart.axis_names()).unwrap())
}

/// For `dz + x dy`: `X = (x H_z - H_y, H_x, H - x H_x)`.
fn lift_oracle(p: &[f64], h: f64, hx: f64, hy: f64, hz: f64) -> [f64; 3] {
    [p[0] * hz - hy, hx, h - p[0] * hx]
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(u, v)| (u - v).abs() <= tol)
}

#[test]
fn lift_of_constants_and_of_x() {
    let leaf = mapping_torus_leaf().unwrap();
    let points = [[0.3, -0.2, 0.5], [-0.7, 0.4, -0.1], [0.0, 0.9, 0.9]];
    let one = mapping_torus_lift(&leaf, &h_field("1")).unwrap();
    let zero = mapping_torus_lift(&leaf, &h_field("0")).unwrap();
    let x = mapping_torus_lift(&leaf, &h_field("x")).unwrap();
    for p in points {
        assert!(close(&one.eval(&p).unwrap(), &[0.0, 0.0, 1.0], 1e-12));
        assert!(close(&zero.eval(&p).unwrap(), &[0.0, 0.0, 0.0], 1e-12));
        assert!(close(&x.eval(&p).unwrap(), &[0.0, 1.0, 0.0], 1e-12));
    }
}

#[test]
fn lift_matches_closed_form_for_a_nonlinear_hamiltonian() {
    let leaf = mapping_torus_leaf().unwrap();
    let lift = mapping_torus_lift(&leaf, &h_field("x^2 + 0.5*y*z + 0.3*sin(x)")).unwrap();
    for p in [[0.3f64, -0.2, 0.5], [-0.7, 0.4, -0.1], [0.9, 0.9, -0.9]] {
        let (x, y, z) = (p[0], p[1], p[2]);
        let h = x * x + 0.5 * y * z + 0.3 * x.sin();
        let want = lift_oracle(&p, h, 2.0 * x + 0.3 * x.cos(), 0.5 * z, 0.5 * y);
        let got = lift.eval(&p).unwrap();
        assert!(close(&got, &want, 1e-12), "{got:?} vs {want:?}");
    }
}

/// Independent RK4 on the closed-form lift of `H = 0.2 x^2 + 0.1 y`.
fn oracle_flow(p: [f64; 3], t_end: f64, steps: usize) -> [f64; 3] {
    let f = |q: [f64; 3]| {
        let h = 0.2 * q[0] * q[0] + 0.1 * q[1];
        lift_oracle(&q, h, 0.4 * q[0], 0.1, 0.0)
    };
    let dt = t_end / steps as f64;
    let mut y = p;
    for _ in 0..steps {
        let add = |a: [f64; 3], b: [f64; 3], c: f64| [a[0] + c * b[0], a[1] + c * b[1], a[2] + c * b[2]];
        let k1 = f(y);
        let k2 = f(add(y, k1, dt / 2.0));
        let k3 = f(add(y, k2, dt / 2.0));
        let k4 = f(add(y, k3, dt));
        for i in 0..3 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    y
}

#[test]
fn transport_on_mapping_torus_follows_the_lift() {
    let pair = mapping_torus_model(&h_field("0.2*x^2 + 0.1*y")).unwrap();
    let (tr, rep) = parallel_transport(&pair, &[0.1, -0.2, 0.05, 0.1], 0.5, 1e-3).unwrap();
    let end = tr.end();
    let want = oracle_flow([0.1, -0.2, 0.05], 0.5, 4000);
    assert!(close(&end[..3], &want, 1e-9), "{end:?} vs {want:?}");
    assert!((end[3] - 0.6).abs() < 1e-12);
    assert!(rep.max_defect < 1e-6, "{}", rep.max_defect);
}

#[test]
fn transport_defect_shrinks_with_the_neighbour_offset() {
    let pair = mapping_torus_model(&h_field("0.5*x^3 + y^2*z + 0.3*x*z")).unwrap();
    let p0 = [0.2, 0.1, -0.1, 0.2];
    let defect = |offset: f64| parallel_transport_with_offset(&pair, &p0, 0.4, 1e-3, offset).unwrap().1.max_defect;
    let (coarse, fine) = (defect(1e-3), defect(1e-4));
    assert!(coarse > 0.0 && fine * 5.0 <= coarse, "{coarse:e} -> {fine:e}");
}

#[test]
fn transport_on_local_model_is_a_translation() {
    let pair = standard_local_model().unwrap();
    let (tr, rep) = parallel_transport(&pair, &[0.7, 1.0, 0.2, 0.1], 0.5, 1e-3).unwrap();
    assert!(close(tr.end(), &[0.7, 1.0, 0.2, 0.6], 1e-12));
    assert!(rep.max_defect < 1e-8);
}

fn t4_chart_family(r: f64, rotating: bool) -> ContactFamily {
    let chart = foliated_contact::models::t4_chart();
    let beta = DifferentialForm::one_form(
        chart.clone(),
        vec![Expr::constant(-1.0), Expr::constant(0.3), Expr::constant(-0.2), Expr::constant(r)],
    )
    .unwrap();
    let phase = if rotating { Expr::var(3).add(&Expr::var(4)) } else { Expr::var(3) }.scale(TAU);
    ContactFamily::new(beta, DifferentialForm::volume(chart, 1.0), vec![Expr::zero(), phase.sin(), phase.cos(), Expr::zero()])
        .unwrap()
}

#[test]
fn gray_velocity_is_tangent_to_leaves_for_tilted_beta() {
    let fam = t4_chart_family(0.4, true);
    for (k, s) in [0.0, 0.3, 0.8].into_iter().enumerate() {
        let p = [0.1 * k as f64, 0.2, 0.35, 0.6];
        let v = gray_velocity(&fam, &p, s).unwrap();
        assert!(v.beta_x < 1e-12 && v.alpha_x < 1e-12, "{v:?}");
        assert!(v.x.iter().any(|c| c.abs() > 0.1));
    }
    let res = gray_flow(&fam, &[vec![0.1, 0.2, 0.3, 0.4]], 1e-2).unwrap();
    assert!(res.conjugation.max_beta_x < 1e-12);
    assert!(res.states[0].lambda_consistency() < 1e-6);
}

#[test]
fn constant_family_does_not_move() {
    let fam = t4_chart_family(0.4, false);
    let v = gray_velocity(&fam, &[0.1, 0.2, 0.3, 0.4], 0.5).unwrap();
    assert!(v.x.iter().all(|c| c.abs() < 1e-15) && v.lambda == 0.0);
    let res = gray_flow(&fam, &[vec![0.1, 0.2, 0.3, 0.4]], 1e-2).unwrap();
    let st = &res.states[0];
    assert_eq!(st.g, 1.0);
    assert!(close(st.trajectory.end(), &st.seed, 1e-15));
}
