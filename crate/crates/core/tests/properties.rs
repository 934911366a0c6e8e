//! Exterior-calculus identities on random fixtures.

mod common;

use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn d_squared_vanishes(seed in any::<u64>(), dim in 2usize..=4, k in 0usize..=2) {
        let r = check_d_squared(seed, dim, k);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn wedge_is_graded_commutative(seed in any::<u64>(), dim in 2usize..=5, k in 0usize..=2, l in 0usize..=2) {
        let r = check_graded_commutativity(seed, dim, k, l);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn d_obeys_leibniz(seed in any::<u64>(), dim in 2usize..=4, k in 0usize..=2, l in 0usize..=1) {
        let r = check_leibniz(seed, dim, k, l);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn cartan_matches_flow_oracle(seed in any::<u64>(), dim in 2usize..=3, k in 0usize..=2) {
        let r = check_cartan(seed, dim, k);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn pullback_is_functorial(seed in any::<u64>(), dim in 2usize..=3, k in 0usize..=2) {
        let r = check_pullback_functoriality(seed, dim, k);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn pullback_matches_pointwise_jacobian(seed in any::<u64>(), dim in 2usize..=4, k in 1usize..=2) {
        let r = check_pullback_pointwise(seed, dim, k);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }

    #[test]
    fn interior_is_an_antiderivation(seed in any::<u64>(), dim in 2usize..=4, k in 1usize..=2, l in 1usize..=2) {
        let r = check_interior_leibniz(seed, dim, k, l);
        prop_assert!(r.is_ok(), "{}", r.unwrap_err());
    }
}

#[test]
fn lie_oracle_rejects_half_of_the_cartan_formula() {
    let mut g = rng(7);
    let chart = cube(3);
    let a = form(&mut g, &chart, 1);
    let x = field(&mut g, &chart);
    let half = a.d().interior(&x).unwrap();
    let p = point(&mut g, 3, 0.5);
    let worst = lie_oracle(&a, &x, &p)
        .into_iter()
        .map(|(idx, v)| (half.component(&idx).eval(&p) - v).abs())
        .fold(0.0, f64::max);
    assert!(worst > 1e-2, "{worst}");
}
