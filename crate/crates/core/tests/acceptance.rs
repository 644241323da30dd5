//! Acceptance criteria 1–11. Prints one PASS/FAIL line per criterion and
//! exits nonzero when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bpinterp::auxiliary::oracle::{phi_oracle_small_d, Program};
use bpinterp::auxiliary::{feasible_interval, phi_minus, phi_n, phi_plus, sparsity_window, AuxParams, FeasibleInterval};
use bpinterp::datagen::{gaussian_vector, gen_instance, FeatureDistribution, InstanceConfig};
use bpinterp::experiments::verify::{aux_verify, path_verify};
use bpinterp::experiments::{
    csv, inversions, ls_slope, run_fig1a, run_fig1b, summarize, Estimator, ExperimentConfig, GroupSummary, Scale,
};
use bpinterp::interpolators::{basis_pursuit, prediction_error};
use bpinterp::optim::{solve_path_qp, QpOptions};
use bpinterp::path::{abs_order_stats, path_norm_estimates};
use bpinterp::quantiles::{phi_c, t_quantile};

const SEED: u64 = 20240611;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn rate_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::fig1a(Scale::Small);
    cfg.dists = vec![FeatureDistribution::Normal];
    cfg.seed = SEED;
    cfg
}

fn means(groups: &[GroupSummary], est: Estimator) -> Vec<&GroupSummary> {
    groups.iter().filter(|g| g.estimator == est).collect()
}

fn rate_reproduction() -> Verdict {
    let mut cfg = rate_config();
    cfg.threads = 1;
    let start = Instant::now();
    let recs = run_fig1a(&cfg).expect("fig1a run");
    let secs = start.elapsed().as_secs_f64();
    let groups = summarize(&recs);
    let bp = means(&groups, Estimator::BP);
    let mut ok = bp.len() == 3 && bp.iter().all(|g| g.failed == 0);
    let mut parts = Vec::new();
    for g in &bp {
        let ratio = g.mean_err / (1.0 / (g.d as f64 / g.n as f64).ln());
        ok &= (0.6..=1.6).contains(&ratio);
        parts.push(format!("d={} err={:.4} ratio={:.3}", g.d, g.mean_err, ratio));
    }
    let inv = inversions(&bp.iter().map(|g| g.mean_err).collect::<Vec<_>>());
    ok &= inv <= 1 && secs <= 900.0;
    verdict(ok, format!("{}; inversions={inv}; {secs:.1}s single-threaded", parts.join(", ")))
}

fn sigma_linearity() -> Verdict {
    let mut cfg = ExperimentConfig::fig1b(Scale::Small);
    cfg.seed = SEED;
    let recs = run_fig1b(&cfg).expect("fig1b run");
    let groups = summarize(&recs);
    let bp = means(&groups, Estimator::BP);
    let l2 = means(&groups, Estimator::MinL2);
    let xs: Vec<f64> = bp.iter().map(|g| g.sigma2).collect();
    let slope = ls_slope(&xs, &bp.iter().map(|g| g.mean_err).collect::<Vec<_>>());
    let slope_ratio = slope * 50f64.ln();
    let l2m: Vec<f64> = l2.iter().map(|g| g.mean_err).collect();
    let lo = l2m.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = l2m.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let variation = (hi - lo) / lo;
    let ok = groups.iter().all(|g| g.failed == 0)
        && (0.7..=1.4).contains(&slope_ratio)
        && variation < 0.25
        && l2m.iter().all(|m| (0.7..=1.1).contains(m));
    verdict(
        ok,
        format!(
            "BP slope={slope:.4} (×log50 = {slope_ratio:.3}); MinL2 means={:?}, variation={:.1}%",
            l2m.iter().map(|m| (m * 1e4).round() / 1e4).collect::<Vec<_>>(),
            100.0 * variation
        ),
    )
}

fn noiseless_recovery() -> Verdict {
    let start = Instant::now();
    let mut good = 0;
    let mut worst = 0.0f64;
    for seed in 0..10 {
        let inst = gen_instance(&InstanceConfig::new(50, 1000, 0.0, FeatureDistribution::Normal, seed, 0)).unwrap();
        let err = basis_pursuit(&inst.x, &inst.y)
            .ok()
            .and_then(|r| prediction_error(&r.w_hat, &inst.w_star).ok())
            .unwrap_or(f64::INFINITY);
        worst = worst.max(err);
        good += (err <= 1e-8) as usize;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(good >= 9 && secs <= 60.0, format!("{good}/10 seeds with error ≤ 1e-8 (worst {worst:.2e}); {secs:.1}s"))
}

fn path_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut failures, mut worst) = (0, 0.0f64);
    for d in [3usize, 5, 8] {
        for k in 0..100 {
            let st = abs_order_stats(&gaussian_vector(d, SEED, k)).unwrap();
            for _ in 0..20 {
                let a = rng.random_range(1.0..st.alpha_max());
                let g = st.gamma(a).unwrap();
                let diff = match solve_path_qp(st.h(), st.h_inf(), a, &QpOptions::default()) {
                    Ok(qp) => g.w.iter().zip(&qp.w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max),
                    Err(_) => f64::INFINITY,
                };
                worst = worst.max(diff);
                failures += (diff > 1e-6) as usize;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(failures == 0 && secs <= 30.0, format!("6000 points, {failures} failures, max |Δ| = {worst:.2e}; {secs:.2}s"))
}

fn path_invariants() -> Verdict {
    let rows = path_verify(200, 100, SEED, 50, 0).unwrap();
    let l1 = rows.iter().map(|r| r.max_l1_rel).fold(0.0, f64::max);
    let inner = rows.iter().map(|r| r.max_inner_rel).fold(0.0, f64::max);
    let viol: usize = rows.iter().map(|r| r.monotonicity_violations).sum();
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    verdict(
        l1 <= 1e-10 && inner <= 1e-10 && viol == 0 && errors == 0,
        format!("max rel ‖γ‖₁ err {l1:.2e}, max rel ⟨γ,H⟩ err {inner:.2e}, {viol} monotonicity violations"),
    )
}

/// Φ̄(x) to 20 digits, computed with mpmath at 40-digit precision.
const PHI_C_REFERENCE: [(f64, f64); 20] = [
    (-5.0, 0.99999971334842812081),
    (-2.0, 0.9772498680518207928),
    (-1.0, 0.84134474606854294859),
    (-0.5, 0.69146246127401310364),
    (0.0, 0.5),
    (0.25, 0.40129367431707627576),
    (0.5, 0.30853753872598689636),
    (1.0, 0.15865525393145705141),
    (1.4, 0.080756659233771059795),
    (1.5, 0.066807201268858066004),
    (2.0, 0.0227501319481792072),
    (2.5, 0.006209665325776135167),
    (3.0, 0.0013498980316300945267),
    (4.0, 0.000031671241833119921254),
    (5.0, 2.8665157187919391167e-7),
    (6.0, 9.865876450376981407e-10),
    (8.0, 6.2209605742717841235e-16),
    (10.0, 7.619853024160526066e-24),
    (15.0, 3.6709661993127508858e-51),
    (20.0, 2.7536241186062336951e-89),
];

fn quantile_sandwiches() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6);
    let mut violations = 0;
    for _ in 0..1000 {
        let d = 10f64.powf(rng.random_range(11f64.log10()..7.0)) as u64;
        let s = rng.random_range(1..=d / 11);
        let q = t_quantile(s, d).unwrap();
        let t2 = q.t * q.t;
        let l = (d as f64 / s as f64).ln();
        let tb2 = q.t_bar.map(|v| v * v).unwrap_or(f64::NAN);
        if !(l <= t2 && t2 <= 2.0 * l && tb2 - 1.0 <= t2 && t2 <= tb2) {
            violations += 1;
        }
    }
    let worst = PHI_C_REFERENCE.iter().map(|&(x, r)| ((phi_c(x) - r) / r).abs()).fold(0.0, f64::max);
    verdict(
        violations == 0 && worst <= 1e-12,
        format!("{violations} sandwich violations in 1000 pairs; max phi_c rel err {worst:.2e} at 20 points"),
    )
}

fn reparametrization() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let rel = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) => (a - b).abs() / b.abs().max(1e-300),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    };
    let (mut cases, mut failures, mut worst, mut draw) = (0, 0, 0.0f64, 0u64);
    while cases < 20 {
        let h = gaussian_vector(5, SEED ^ 7, draw);
        draw += 1;
        let st = abs_order_stats(&h).unwrap();
        let n = rng.random_range(1..=2usize);
        let rho = rng.random_range(0.05..0.45);
        let sigma2 = rng.random_range(0.2..2.0);
        let c = rng.random_range(1.0..2.5);
        let base = AuxParams { n, d: 5, sigma2, rho, b: 1.0, c_b: 0.0, c_geoff: 2.0, s_star: 1.0 };
        let Ok(nv) = phi_n(&st, &base) else { continue };
        let p = AuxParams { b: c * nv.value, ..base };
        let iv = feasible_interval(&st, &p).unwrap();
        let (plus, minus) = match iv {
            FeasibleInterval::Empty => (None, None),
            _ => (Some(phi_plus(&st, &p, iv).unwrap().value), Some(phi_minus(&st, &p, iv).unwrap().value)),
        };
        let errs = [
            rel(phi_oracle_small_d(&h, Program::N, &p).value, Some(nv.value)),
            rel(phi_oracle_small_d(&h, Program::Plus, &p).value, plus),
            rel(phi_oracle_small_d(&h, Program::Minus, &p).value, minus),
        ];
        for e in errs {
            worst = worst.max(e);
            failures += (e > 1e-3) as usize;
        }
        cases += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(failures == 0 && secs <= 300.0, format!("60 comparisons, {failures} failures, max rel err {worst:.2e}; {secs:.1}s"))
}

fn bound_sandwich() -> Verdict {
    let params = AuxParams::new(100, 5000, 1.0).unwrap();
    let (_, s) = aux_verify(&params, 50, SEED, 0).unwrap();
    let rate = params.target_rate();
    verdict(
        s.pass(),
        format!(
            "ordered on all draws: {}; both in [0.4,2.5]×rate: {:.0}%; φ_N ≤ 1.05·M: {:.0}%; mean φ₊/rate={:.2}, mean φ₋/rate={:.3}",
            s.all_ordered,
            100.0 * s.band_fraction,
            100.0 * s.phi_n_fraction,
            s.mean_phi_plus / rate,
            s.mean_phi_minus / rate
        ),
    )
}

fn concentration() -> Verdict {
    let (d, s) = (5000usize, 100usize);
    let est = path_norm_estimates(s as u64, d as u64).unwrap();
    let t = est.quantile.t;
    let (mut ok2, mut ok1) = (0, 0);
    let (mut sum2, mut sum1) = (0.0, 0.0);
    for k in 0..200 {
        let st = abs_order_stats(&gaussian_vector(d, SEED ^ 9, k)).unwrap();
        let a = st.breakpoint(s);
        let hinf = st.h_inf();
        let r2 = st.gamma_l2sq(a) / (hinf * hinf * 2.0 / (s as f64 * t * t));
        let r1 = st.gamma_norms(a).unwrap().alpha / (hinf * (1.0 / t - 2.0 / t.powi(3)));
        ok2 += (0.7..=1.3).contains(&r2) as usize;
        ok1 += (0.85..=1.15).contains(&r1) as usize;
        sum2 += r2;
        sum1 += r1;
    }
    verdict(
        ok2 >= 180 && ok1 >= 180,
        format!(
            "ℓ2² ratio in window on {ok2}/200 (mean {:.3}); ℓ1 ratio in window on {ok1}/200 (mean {:.3})",
            sum2 / 200.0,
            sum1 / 200.0
        ),
    )
}

fn window() -> Verdict {
    let params = AuxParams::new(400, 20000, 1.0).unwrap();
    let w = sparsity_window(&params, 1.0).unwrap();
    let close = (w.s_lower as f64 - w.approx_lower).abs() <= 2.0 && (w.s_upper as f64 - w.approx_upper).abs() <= 2.0;
    let (_, s) = aux_verify(&params, 30, SEED, 0).unwrap();
    verdict(
        close && s.window_fraction >= 0.9,
        format!(
            "window ({}, {}) vs approximation ({:.1}, {:.1}); argmin in [α_s̲, α_s̄] on {:.0}% of 30 draws",
            w.s_lower,
            w.s_upper,
            w.approx_lower,
            w.approx_upper,
            100.0 * s.window_fraction
        ),
    )
}

fn determinism() -> Verdict {
    let mut outputs = Vec::new();
    for threads in [1, 3, 8] {
        let mut cfg = rate_config();
        cfg.threads = threads;
        outputs.push(csv::to_csv_string(&run_fig1a(&cfg).expect("fig1a run")));
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(same, format!("threads 1/3/8 → {} identical CSV bytes: {same}", outputs[0].len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("rate reproduction (scaled fig1a)", rate_reproduction),
        ("σ²-linearity (scaled fig1b)", sigma_linearity),
        ("noiseless exact recovery", noiseless_recovery),
        ("path oracle equivalence", path_oracle),
        ("path invariants", path_invariants),
        ("quantile sandwiches", quantile_sandwiches),
        ("reparametrization exactness", reparametrization),
        ("bound sandwich", bound_sandwich),
        ("concentration of path norms", concentration),
        ("sparsity window", window),
        ("determinism across thread counts", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| {
                let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
                verdict(false, format!("panicked: {}", msg.unwrap_or_default()))
            });
        failed += (!v.pass) as usize;
        println!(
            "{} criterion {:>2}: {name} — {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
