use proptest::prelude::*;

use bpinterp::quantiles::{h_factor, phi_c, t_quantile};

#[test]
fn h_bounds_on_a_dense_grid() {
    for k in 1..=10_000 {
        let x = 40.0 * k as f64 / 10_000.0;
        let h = h_factor(x).unwrap();
        assert!(h > 1.0 - 1.0 / (1.0 + x * x) && h <= 1.0, "x={x}, h={h}");
    }
}

#[test]
fn phi_c_is_symmetric() {
    for k in 0..200 {
        let x = k as f64 * 0.05;
        assert!((phi_c(x) + phi_c(-x) - 1.0).abs() < 2e-16);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn sandwich_holds(s in 1u64..5000, k in 11u64..2000) {
        let d = s * k;
        let q = t_quantile(s, d).unwrap();
        let t2 = q.t * q.t;
        let l = (d as f64 / s as f64).ln();
        prop_assert!(l <= t2 && t2 <= 2.0 * l);
        let tb2 = q.t_bar.unwrap().powi(2);
        prop_assert!(tb2 - 1.0 <= t2 && t2 <= tb2);
        let v = q.sandwich.unwrap();
        prop_assert!(v.log_bounds && v.t_bar_bounds);
    }

    #[test]
    fn consistent_and_monotone(d in 20u64..1_000_000, frac in 0.0f64..1.0) {
        let s = 1 + ((d - 2) as f64 * frac) as u64;
        let a = t_quantile(s, d).unwrap();
        let b = t_quantile(s + 1, d).unwrap();
        prop_assert!(b.t < a.t);
        prop_assert!((2.0 * phi_c(a.t) * d as f64 - s as f64).abs() <= 1e-9 * d as f64);
    }
}
