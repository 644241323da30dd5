use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bpinterp::datagen::gaussian_vector;
use bpinterp::path::{abs_order_stats, verify_monotonicity};

/// Random point of `{w ≥ 0, ‖w‖₁ = α, ⟨w, H⟩ = ‖H‖∞}`: mix two scaled
/// simplex points whose inner products bracket `‖H‖∞`.
fn feasible_point(h: &[f64], alpha: f64, rng: &mut ChaCha8Rng) -> Option<Vec<f64>> {
    let d = h.len();
    let simplex = |rng: &mut ChaCha8Rng| {
        let e: Vec<f64> = (0..d).map(|_| -rng.random_range(1e-12f64..1.0).ln()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| alpha * v / s).collect::<Vec<f64>>()
    };
    let inner = |w: &[f64]| w.iter().zip(h).map(|(a, b)| a * b).sum::<f64>();
    let tau = h[0];
    for _ in 0..50 {
        let (u, v) = (simplex(rng), simplex(rng));
        let (iu, iv) = (inner(&u), inner(&v));
        if (iu - tau) * (iv - tau) < 0.0 {
            let t = (tau - iu) / (iv - iu);
            return Some(u.iter().zip(&v).map(|(a, b)| (1.0 - t) * a + t * b).collect());
        }
    }
    None
}

/// No feasible point of the slice has smaller norm than γ(α), and any
/// point with equal norm is γ(α) itself.
#[test]
fn closed_form_is_the_unique_minimizer_on_random_feasible_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for d in 2..=8 {
        for k in 0..20 {
            let st = abs_order_stats(&gaussian_vector(d, 77, k)).unwrap();
            let h = st.h().to_vec();
            for _ in 0..5 {
                let a = rng.random_range(1.0..st.alpha_max());
                let g = st.gamma(a).unwrap();
                for _ in 0..200 {
                    let Some(w) = feasible_point(&h, a, &mut rng) else { continue };
                    let n2: f64 = w.iter().map(|v| v * v).sum();
                    let dist: f64 = w.iter().zip(&g.w).map(|(x, y)| (x - y).powi(2)).sum();
                    // Strong convexity: ‖w‖² ≥ ‖γ‖² + ‖w − γ‖².
                    assert!(n2 >= g.l2sq + dist - 1e-10, "d={d} α={a}: {n2} < {}", g.l2sq + dist);
                }
            }
        }
    }
}

#[test]
fn three_two_one_minimum() {
    let st = abs_order_stats(&[3.0, 2.0, 1.0]).unwrap();
    assert!((st.alpha_diamond() - 9.0 / 7.0).abs() < 1e-14);
    assert!((st.gamma_l2sq(9.0 / 7.0) - 9.0 / 14.0).abs() < 1e-14);
    let g = st.gamma(9.0 / 7.0).unwrap();
    assert!((g.lambda - 3.0 / 14.0).abs() < 1e-14 && g.mu.abs() < 1e-14);
}

#[test]
fn monotonicity_on_random_h() {
    for k in 0..100 {
        let st = abs_order_stats(&gaussian_vector(50, 123, k)).unwrap();
        let report = verify_monotonicity(&st, 5).unwrap();
        assert!(report.ok(), "draw {k}: {:?}", report.violations.first());
    }
}
