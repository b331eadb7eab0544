use proptest::prelude::*;

use wiener_chaos::chaos::{ChaosExpansion, HValuedChaos, MultiIndex, Truncation};
use wiener_chaos::integrator::{ito_integral, malliavin_trace, strat_integral};

const TRUNC: Truncation = Truncation { modes: 3, max_order: 4 };

fn expansion() -> impl Strategy<Value = ChaosExpansion> {
    let n = TRUNC.size();
    prop::collection::vec(-2.0f64..2.0, n).prop_map(|v| {
        ChaosExpansion::from_coeffs(TRUNC, TRUNC.enumerate().into_iter().zip(v)).unwrap()
    })
}

fn integrand() -> impl Strategy<Value = HValuedChaos> {
    let trunc = Truncation::new(3, 3);
    let n = trunc.size() * trunc.modes;
    prop::collection::vec(-1.0f64..1.0, n).prop_map(move |v| {
        let mut eta = HValuedChaos::zero(trunc);
        for (i, a) in trunc.enumerate().into_iter().enumerate() {
            eta.set_row(a, &v[i * 3..i * 3 + 3]).unwrap();
        }
        eta
    })
}

fn wick(a: &ChaosExpansion, b: &ChaosExpansion) -> ChaosExpansion {
    a.wick_product(b).unwrap().product
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wick_is_commutative(a in expansion(), b in expansion()) {
        prop_assert!(wick(&a, &b).max_abs_diff(&wick(&b, &a)) < 1e-12);
    }

    #[test]
    fn wick_is_associative(a in expansion(), b in expansion(), c in expansion()) {
        let left = wick(&wick(&a, &b), &c);
        let right = wick(&a, &wick(&b, &c));
        prop_assert!(left.max_abs_diff(&right) < 1e-9);
    }

    #[test]
    fn wick_distributes_over_sums(a in expansion(), b in expansion(), c in expansion()) {
        let left = wick(&a, &b.add(&c).unwrap());
        let right = wick(&a, &b).add(&wick(&a, &c)).unwrap();
        prop_assert!(left.max_abs_diff(&right) < 1e-10);
    }

    #[test]
    fn wick_unit_and_means(a in expansion(), b in expansion()) {
        let one = ChaosExpansion::constant(TRUNC, 1.0);
        prop_assert!(wick(&one, &a).max_abs_diff(&a) == 0.0);
        // E[a ⋄ b] = E a · E b.
        prop_assert!((wick(&a, &b).mean() - a.mean() * b.mean()).abs() < 1e-12);
    }

    #[test]
    fn wick_product_mass_is_conserved(a in expansion(), b in expansion()) {
        let wide = Truncation::new(3, 8);
        let (a8, _) = a.retruncated(wide);
        let (b8, _) = b.retruncated(wide);
        let full = a8.wick_product(&b8).unwrap().product;
        let cut = a.wick_product(&b).unwrap();
        prop_assert!((full.norm_sq() - cut.product.norm_sq() - cut.dropped_mass).abs() < 1e-8 * full.norm_sq().max(1.0));
    }

    #[test]
    fn ito_is_linear(x in integrand(), y in integrand(), s in -3.0f64..3.0) {
        let lhs = ito_integral(&x.scaled(s).add(&y).unwrap());
        let rhs = ito_integral(&x).scaled(s).add(&ito_integral(&y)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn ito_has_zero_mean_and_isometry_for_deterministic(f in prop::collection::vec(-1.0f64..1.0, 3)) {
        let eta = HValuedChaos::deterministic(Truncation::new(3, 1), &f).unwrap();
        let i = ito_integral(&eta);
        prop_assert_eq!(i.mean(), 0.0);
        let norm: f64 = f.iter().map(|v| v * v).sum();
        prop_assert!((i.norm_sq() - norm).abs() < 1e-14);
    }

    #[test]
    fn strat_minus_ito_is_trace(x in integrand()) {
        let diff = strat_integral(&x).sub(&ito_integral(&x)).unwrap();
        prop_assert!(diff.max_abs_diff(&malliavin_trace(&x)) < 1e-12);
    }

    #[test]
    fn graded_order_is_total(a in prop::collection::vec(0u32..3, 3), b in prop::collection::vec(0u32..3, 3)) {
        let a = MultiIndex::from_dense(&a);
        let b = MultiIndex::from_dense(&b);
        prop_assert_eq!(a.cmp(&b) == std::cmp::Ordering::Equal, a == b);
        if a.order() < b.order() {
            prop_assert!(a < b);
        }
    }
}
