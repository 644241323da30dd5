//! Browser bindings for three interactive views: the parametric path of a
//! Gaussian draw, the quantile sandwich, and BP vs min-ℓ2 on one instance.
//!
//! Every export returns a flat `Float64Array` so the page needs no glue
//! beyond the generated bindings.

use wasm_bindgen::prelude::*;

use bpinterp::datagen::{gaussian_vector, gen_instance, FeatureDistribution, InstanceConfig};
use bpinterp::interpolators::{basis_pursuit, min_l2_interpolator, prediction_error};
use bpinterp::path::abs_order_stats;
use bpinterp::quantiles::t_quantile;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// `[α_⋄, α_max, α₀, ‖γ(α₀)‖², α₁, ‖γ(α₁)‖², …]` for `points` evenly spaced
/// α in `[1, α_max]` on the path of `H ~ N(0, I_d)`.
#[wasm_bindgen]
pub fn path_curve(d: usize, seed: u64, points: usize) -> Result<Vec<f64>, String> {
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let st = abs_order_stats(&gaussian_vector(d, seed, 0)).map_err(err)?;
    let top = st.alpha_max();
    let mut out = vec![st.alpha_diamond(), top];
    for k in 0..points {
        let a = 1.0 + (top - 1.0) * k as f64 / (points - 1) as f64;
        out.push(a);
        out.push(st.gamma_norms(a).map_err(err)?.l2sq);
    }
    Ok(out)
}

/// Breakpoints `α_2 … α_{d+1}` of the same path.
#[wasm_bindgen]
pub fn path_breakpoints(d: usize, seed: u64) -> Result<Vec<f64>, String> {
    Ok(abs_order_stats(&gaussian_vector(d, seed, 0)).map_err(err)?.breakpoints())
}

/// `[t, t², t̄², log(d/s), 2·log(d/s), inside]` with `inside = 1` when both
/// sandwiches hold (NaN when `d < 11s`).
#[wasm_bindgen]
pub fn quantile_sandwich(s: u64, d: u64) -> Result<Vec<f64>, String> {
    let q = t_quantile(s, d).map_err(err)?;
    let l = (d as f64 / s as f64).ln();
    let inside = q.sandwich.map_or(f64::NAN, |v| f64::from(u8::from(v.log_bounds && v.t_bar_bounds)));
    Ok(vec![q.t, q.t * q.t, q.t_bar.map_or(f64::NAN, |v| v * v), l, 2.0 * l, inside])
}

/// `[BP error, min-ℓ2 error, BP ℓ1, min-ℓ2 ℓ1, BP support, σ²/log(d/n)]` on
/// one instance with `w* = e₁`. `dist` is normal, lognormal or rademacher.
#[wasm_bindgen]
pub fn compare_interpolators(n: usize, d: usize, sigma2: f64, dist: &str, seed: u64) -> Result<Vec<f64>, String> {
    let dist: FeatureDistribution = dist.parse().map_err(err)?;
    let inst = gen_instance(&InstanceConfig::new(n, d, sigma2, dist, seed, 0)).map_err(err)?;
    let bp = basis_pursuit(&inst.x, &inst.y).map_err(err)?;
    let l2 = min_l2_interpolator(&inst.x, &inst.y).map_err(err)?;
    Ok(vec![
        prediction_error(&bp.w_hat, &inst.w_star).map_err(err)?,
        prediction_error(&l2.w_hat, &inst.w_star).map_err(err)?,
        bp.l1_norm,
        l2.l1_norm,
        bp.support_size as f64,
        sigma2 / (d as f64 / n as f64).ln(),
    ])
}
