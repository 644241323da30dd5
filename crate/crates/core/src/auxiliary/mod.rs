//! The scalar reformulations of the Gaussian auxiliary programs over the
//! path `γ(α)`, the radii `M(n,d)` and `B(n,d)`, the feasible interval `I`,
//! and the sparsity window around `s = n`.
//!
//! With `k± = (1 ± ρ)n` and `q(α) = ‖γ(α)‖₂²` (note `‖γ(α)‖₁ = α`):
//!
//! ```text
//! φ_N² = min_α  α²σ²k₊ / (H∞² − k₊ q(α))                  over k₊ q(α) < H∞²
//! φ_+  = max_{α∈I} B² q(α)/α²
//! φ_−  = min_{α∈I} k₋σ² q(α) / (H∞² − k₋ q(α))
//! I    = {α : k₋(σ²α² + B² q(α)) ≤ B² H∞²}
//! ```

pub mod oracle;

use crate::error::{Error, Result};
use crate::path::PathState;
use crate::quantiles::t_quantile;

/// Absolute tolerance in `α` for the line searches.
pub const ALPHA_TOL: f64 = 1e-10;
/// Iteration cap for the line searches.
pub const MAX_LINE_ITERS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MVariant {
    /// `sqrt(σ²n/t_n² · (1 − 2/t_n² + c_B/t_n⁴))`.
    Proposition,
    /// `sqrt(σ²n / (2 log(d/n) − log log(d/n) − log π))`.
    ProofSketch,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxParams {
    pub n: usize,
    pub d: usize,
    pub sigma2: f64,
    pub rho: f64,
    /// Localization radius `B`.
    pub b: f64,
    pub c_b: f64,
    pub c_geoff: f64,
    pub s_star: f64,
}

impl AuxParams {
    /// `ρ = 10/log(d/n)^{5/2}`, `c_B = 0`, `c_geoff = 2`, `s* = 1`, and `B`
    /// from [`b_radius`] with the proof-sketch `M`. Needs `d > 11n`.
    pub fn new(n: usize, d: usize, sigma2: f64) -> Result<Self> {
        let mut p = Self {
            n,
            d,
            sigma2,
            rho: default_rho(n, d),
            b: f64::NAN,
            c_b: 0.0,
            c_geoff: 2.0,
            s_star: 1.0,
        };
        p.b = b_radius(&p, MVariant::ProofSketch)?;
        Ok(p)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// `σ²/log(d/n)`.
    pub fn target_rate(&self) -> f64 {
        self.sigma2 / (self.d as f64 / self.n as f64).ln()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d <= self.n {
            return Err(Error::InvalidConfig(format!("need 0 < n < d, got n={}, d={}", self.n, self.d)));
        }
        if !(self.rho > 0.0 && self.rho < 0.5) {
            return Err(Error::InvalidConfig(format!("rho must lie in (0, 1/2), got {}", self.rho)));
        }
        if !(self.sigma2 >= 0.0) || !self.sigma2.is_finite() {
            return Err(Error::InvalidConfig(format!("sigma2 must be finite and ≥ 0, got {}", self.sigma2)));
        }
        if !(self.b >= 0.0) {
            return Err(Error::InvalidConfig(format!("B must be ≥ 0, got {}", self.b)));
        }
        Ok(())
    }

    fn k_plus(&self) -> f64 {
        (1.0 + self.rho) * self.n as f64
    }

    fn k_minus(&self) -> f64 {
        (1.0 - self.rho) * self.n as f64
    }
}

pub fn default_rho(n: usize, d: usize) -> f64 {
    10.0 / (d as f64 / n as f64).ln().powf(2.5)
}

pub fn m_bound(params: &AuxParams, variant: MVariant) -> Result<f64> {
    let (n, d) = (params.n as u64, params.d as u64);
    if n == 0 || d <= 11 * n {
        return Err(Error::Domain(format!("M(n,d) needs d > 11n, got n={n}, d={d}")));
    }
    let nf = n as f64;
    let (num, den) = match variant {
        MVariant::Proposition => {
            let t2 = t_quantile(n, d)?.t.powi(2);
            (params.sigma2 * nf / t2, 1.0 - 2.0 / t2 + params.c_b / (t2 * t2))
        }
        MVariant::ProofSketch => {
            let l = (d as f64 / nf).ln();
            (params.sigma2 * nf, 2.0 * l - l.ln() - std::f64::consts::PI.ln())
        }
    };
    if !(den > 0.0) {
        return Err(Error::Domain(format!("M(n,d) factor is not positive: {den}")));
    }
    Ok(match variant {
        MVariant::Proposition => (num * den).sqrt(),
        MVariant::ProofSketch => (num / den).sqrt(),
    })
}

/// `B = c_geoff·σ·√s* + M(n,d)`.
pub fn b_radius(params: &AuxParams, variant: MVariant) -> Result<f64> {
    Ok(params.c_geoff * params.sigma() * params.s_star.sqrt() + m_bound(params, variant)?)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinusOptimum {
    pub value: f64,
    pub alpha: f64,
    /// `H∞² ≤ k₋ q(α*)`; `value` is then `+∞`.
    pub degenerate_denominator: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FeasibleInterval {
    Empty,
    Interval { low: f64, high: f64 },
}

impl FeasibleInterval {
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match *self {
            FeasibleInterval::Empty => None,
            FeasibleInterval::Interval { low, high } => Some((low, high)),
        }
    }
}

/// `f̃(α)²`, or `+∞` where `k₊ q(α) ≥ H∞²`.
pub fn f_tilde_sq(state: &PathState, params: &AuxParams, alpha: f64) -> f64 {
    let h2 = state.h_inf().powi(2);
    let k = params.k_plus();
    let q = state.gamma_l2sq(alpha);
    let den = h2 - k * q;
    if !(den > 0.0) {
        return f64::INFINITY;
    }
    alpha * alpha * params.sigma2 * k / den
}

/// Golden-section minimization on `[a, b]` (either order) starting from the
/// endpoint `a`, whose value is finite. Points with value `+∞` are taken to
/// lie on the far side of the feasible part, so the bracket shrinks toward `a`.
fn golden_from(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let a_is_lo = a <= b;
    let mut best = (a, f(a));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..MAX_LINE_ITERS {
        for (x, v) in [(x1, f1), (x2, f2)] {
            if v < best.1 {
                best = (x, v);
            }
        }
        if hi - lo <= ALPHA_TOL {
            break;
        }
        let keep_left = if f1.is_infinite() && f2.is_infinite() { a_is_lo } else { f1 <= f2 };
        if keep_left {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    best
}

/// `φ_N` and its minimizing `α`: all breakpoints and `α♦` are evaluated, then
/// golden-section search refines the two intervals adjacent to the best one.
pub fn phi_n(state: &PathState, params: &AuxParams) -> Result<Optimum> {
    params.validate()?;
    let mut cands = state.breakpoints();
    cands.push(state.alpha_diamond());
    cands.sort_by(f64::total_cmp);
    let f = |a: f64| f_tilde_sq(state, params, a);
    let vals: Vec<f64> = cands.iter().map(|&a| f(a)).collect();
    let (k, &v) = vals
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("at least two candidates");
    if v.is_infinite() {
        return Err(Error::InfeasibleEverywhere);
    }
    let mut best = (cands[k], v);
    for nb in [k.checked_sub(1), Some(k + 1)].into_iter().flatten() {
        if nb < cands.len() && cands[nb] != cands[k] {
            let cand = golden_from(&f, cands[k], cands[nb]);
            if cand.1 < best.1 {
                best = cand;
            }
        }
    }
    Ok(Optimum { value: best.1.sqrt(), alpha: best.0 })
}

/// `g(α) = k₋(σ²α² + B²q(α)) − B²H∞²`; convex in `α`.
pub fn interval_g(state: &PathState, params: &AuxParams, alpha: f64) -> f64 {
    let b2 = params.b * params.b;
    params.k_minus() * (params.sigma2 * alpha * alpha + b2 * state.gamma_l2sq(alpha)) - b2 * state.h_inf().powi(2)
}

fn bisect_root(g: &dyn Fn(f64) -> f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..MAX_LINE_ITERS {
        if (outside - inside).abs() <= ALPHA_TOL {
            break;
        }
        let mid = 0.5 * (inside + outside);
        if g(mid) <= 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// `I = {α ∈ [1, α_max] : g(α) ≤ 0}` via ternary search for the minimum of
/// `g` and bisection for each root.
pub fn feasible_interval(state: &PathState, params: &AuxParams) -> Result<FeasibleInterval> {
    params.validate()?;
    let g = |a: f64| interval_g(state, params, a);
    let (mut lo, mut hi) = (1.0, state.alpha_max());
    for _ in 0..MAX_LINE_ITERS {
        if hi - lo <= ALPHA_TOL {
            break;
        }
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if g(m1) <= g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let amin = 0.5 * (lo + hi);
    if g(amin) > 0.0 {
        return Ok(FeasibleInterval::Empty);
    }
    let amax = state.alpha_max();
    let low = if g(1.0) <= 0.0 { 1.0 } else { bisect_root(&g, amin, 1.0) };
    let high = if g(amax) <= 0.0 { amax } else { bisect_root(&g, amin, amax) };
    Ok(FeasibleInterval::Interval { low, high })
}

fn require_interval(interval: FeasibleInterval) -> Result<(f64, f64)> {
    interval.bounds().ok_or(Error::EmptyInterval)
}

/// `φ_+ = B² q(α_low)/α_low²`, since `q(α)/α²` is decreasing.
pub fn phi_plus(state: &PathState, params: &AuxParams, interval: FeasibleInterval) -> Result<Optimum> {
    let (low, _) = require_interval(interval)?;
    Ok(Optimum { value: params.b * params.b * state.gamma_l2sq(low) / (low * low), alpha: low })
}

/// `φ_−` at `α* = clamp(α♦, I)`, where `q` is smallest on `I`.
pub fn phi_minus(state: &PathState, params: &AuxParams, interval: FeasibleInterval) -> Result<MinusOptimum> {
    let (low, high) = require_interval(interval)?;
    let alpha = state.alpha_diamond().clamp(low, high);
    let k = params.k_minus();
    let q = state.gamma_l2sq(alpha);
    let den = state.h_inf().powi(2) - k * q;
    if !(den > 0.0) {
        return Ok(MinusOptimum { value: f64::INFINITY, alpha, degenerate_denominator: true });
    }
    Ok(MinusOptimum { value: k * params.sigma2 * q / den, alpha, degenerate_denominator: false })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SparsityWindow {
    pub s_lower: usize,
    pub s_upper: usize,
    /// `n·exp(−λ/(2t_n))`.
    pub approx_lower: f64,
    /// `n·exp(λ/(2t_n))`.
    pub approx_upper: f64,
}

/// `s̲` is the largest `s` with `t_s² ≥ t_n² + λ/t_n`; `s̄` the smallest with
/// `t_s² ≤ t_n² − λ/t_n`. Both found by bisection on the decreasing map
/// `s ↦ t_s²`.
pub fn sparsity_window(params: &AuxParams, lambda: f64) -> Result<SparsityWindow> {
    let (n, d) = (params.n as u64, params.d as u64);
    if n == 0 || d < 11 * n {
        return Err(Error::Domain(format!("sparsity window needs 11n ≤ d, got n={n}, d={d}")));
    }
    let max_lambda = 11f64.ln().sqrt();
    if !(lambda > 0.0 && lambda <= max_lambda) {
        return Err(Error::Domain(format!("lambda must lie in (0, {max_lambda}], got {lambda}")));
    }
    let t2 = |s: u64| t_quantile(s, d).map(|q| q.t * q.t);
    let tn = t_quantile(n, d)?.t;
    let upper_thr = tn * tn + lambda / tn;
    let lower_thr = tn * tn - lambda / tn;

    // Largest s in [1, n] with t_s² ≥ upper_thr (fails at s = n).
    if t2(2)? < upper_thr {
        return Err(Error::Domain("sparsity window exits below s = 2".into()));
    }
    let (mut good, mut bad) = (2u64, n);
    while bad - good > 1 {
        let mid = good + (bad - good) / 2;
        if t2(mid)? >= upper_thr { good = mid } else { bad = mid }
    }
    let s_lower = good;

    // Smallest s in (n, d] with t_s² ≤ lower_thr.
    if t2(d)? > lower_thr {
        return Err(Error::Domain("sparsity window exits above s = d".into()));
    }
    let (mut bad, mut good) = (n, d);
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if t2(mid)? <= lower_thr { good = mid } else { bad = mid }
    }
    let s_upper = good;

    let nf = n as f64;
    Ok(SparsityWindow {
        s_lower: s_lower as usize,
        s_upper: s_upper as usize,
        approx_lower: nf * (-lambda / (2.0 * tn)).exp(),
        approx_upper: nf * (lambda / (2.0 * tn)).exp(),
    })
}

/// All auxiliary quantities for one draw of `H`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuxiliaryReport {
    pub phi_n: Option<Optimum>,
    pub phi_plus: Option<Optimum>,
    pub phi_minus: Option<MinusOptimum>,
    pub interval: FeasibleInterval,
    /// Proof-sketch `M(n,d)`, when `d > 11n`.
    pub m: Option<f64>,
    pub target_rate: f64,
    pub window: Option<SparsityWindow>,
}

pub fn auxiliary_report(state: &PathState, params: &AuxParams, lambda: f64) -> Result<AuxiliaryReport> {
    params.validate()?;
    let phi_n = match phi_n(state, params) {
        Ok(v) => Some(v),
        Err(Error::InfeasibleEverywhere) => None,
        Err(e) => return Err(e),
    };
    let interval = feasible_interval(state, params)?;
    Ok(AuxiliaryReport {
        phi_n,
        phi_plus: phi_plus(state, params, interval).ok(),
        phi_minus: phi_minus(state, params, interval).ok(),
        interval,
        m: m_bound(params, MVariant::ProofSketch).ok(),
        target_rate: params.target_rate(),
        window: sparsity_window(params, lambda).ok(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::abs_order_stats;

    fn params(n: usize, d: usize, sigma2: f64, rho: f64, b: f64) -> AuxParams {
        AuxParams { n, d, sigma2, rho, b, c_b: 0.0, c_geoff: 2.0, s_star: 1.0 }
    }

    #[test]
    fn m_bound_examples() {
        let p = AuxParams::new(400, 20000, 1.0).unwrap();
        let sketch = m_bound(&p, MVariant::ProofSketch).unwrap();
        let l = 50f64.ln();
        let direct = (400.0 / (2.0 * l - l.ln() - std::f64::consts::PI.ln())).sqrt();
        assert!((sketch - direct).abs() < 1e-12);
        assert!((sketch - 8.676).abs() < 2e-3, "{sketch}");
        let prop = m_bound(&p, MVariant::Proposition).unwrap();
        assert!(prop > 0.0 && prop < sketch);
        let zero = AuxParams { sigma2: 0.0, ..p };
        assert_eq!(m_bound(&zero, MVariant::ProofSketch).unwrap(), 0.0);
        let small = AuxParams { d: 4000, ..p };
        assert!(m_bound(&small, MVariant::ProofSketch).is_err());
    }

    #[test]
    fn b_radius_examples() {
        let p = AuxParams::new(400, 20000, 1.0).unwrap();
        assert!((p.b - 10.676).abs() < 2e-3);
        let no_truth = AuxParams { s_star: 0.0, ..p };
        let m = m_bound(&p, MVariant::ProofSketch).unwrap();
        assert_eq!(b_radius(&no_truth, MVariant::ProofSketch).unwrap(), m);
        let doubled = AuxParams { sigma2: 4.0, ..p };
        let b2 = b_radius(&doubled, MVariant::ProofSketch).unwrap();
        assert!((b2 - 2.0 * p.b).abs() < 1e-12);
    }

    #[test]
    fn phi_n_homogeneity_and_zero_noise() {
        let st = abs_order_stats(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let p = params(2, 6, 1.0, 0.1, 1.0);
        let base = phi_n(&st, &p).unwrap();
        let scaled = phi_n(&st, &AuxParams { sigma2: 9.0, ..p }).unwrap();
        assert!((scaled.value - 3.0 * base.value).abs() < 1e-9 * base.value);
        assert!((scaled.alpha - base.alpha).abs() < 1e-8);
        assert_eq!(phi_n(&st, &AuxParams { sigma2: 0.0, ..p }).unwrap().value, 0.0);
        // min q = H∞²/‖H‖₂², so k₊ < ‖H‖₂² = 91 is needed.
        assert!(matches!(phi_n(&st, &params(90, 200, 1.0, 0.1, 1.0)), Err(Error::InfeasibleEverywhere)));
        assert!(phi_n(&st, &params(80, 200, 1.0, 0.1, 1.0)).is_ok());
    }

    #[test]
    fn phi_n_matches_dense_scan() {
        let st = abs_order_stats(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let p = params(2, 6, 1.0, 0.1, 1.0);
        let got = phi_n(&st, &p).unwrap();
        let amax = st.alpha_max();
        let scan = (0..=200_000)
            .map(|i| f_tilde_sq(&st, &p, 1.0 + (amax - 1.0) * i as f64 / 200_000.0))
            .fold(f64::INFINITY, f64::min)
            .sqrt();
        assert!(got.value <= scan * (1.0 + 1e-9));
        assert!((got.value - scan).abs() <= 1e-6 * scan);
    }

    #[test]
    fn interval_limits() {
        let st = abs_order_stats(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let big = feasible_interval(&st, &params(2, 6, 1.0, 0.1, 1e9)).unwrap();
        let (low, high) = big.bounds().unwrap();
        assert_eq!(low, 1.0);
        // Boundary where k₋ q(α) = H∞².
        let k = 0.9 * 2.0;
        let qb = st.gamma_l2sq(high);
        assert!(high == st.alpha_max() || (k * qb - 36.0).abs() < 1e-6);
        assert_eq!(feasible_interval(&st, &params(2, 6, 1.0, 0.1, 1e-6)).unwrap(), FeasibleInterval::Empty);
        assert!(matches!(
            phi_plus(&st, &params(2, 6, 1.0, 0.1, 1.0), FeasibleInterval::Empty),
            Err(Error::EmptyInterval)
        ));
    }

    #[test]
    fn plus_minus_basics() {
        let st = abs_order_stats(&[6.0, 5.0, 4.0, 3.0, 2.0, 1.0]).unwrap();
        let p = params(1, 6, 1.0, 0.2, 5.0);
        let iv = feasible_interval(&st, &p).unwrap();
        let plus = phi_plus(&st, &p, iv).unwrap();
        let minus = phi_minus(&st, &p, iv).unwrap();
        assert!(minus.value <= plus.value);
        let forced = FeasibleInterval::Interval { low: 1.0, high: 1.1 };
        assert!((phi_plus(&st, &p, forced).unwrap().value - 25.0).abs() < 1e-12);
        let quiet = AuxParams { sigma2: 0.0, ..p };
        let iv0 = feasible_interval(&st, &quiet).unwrap();
        assert_eq!(phi_minus(&st, &quiet, iv0).unwrap().value, 0.0);
        // (σ, B) → (cσ, cB) scales φ± by c².
        let c = 3.0;
        let sc = AuxParams { sigma2: 9.0, b: 15.0, ..p };
        let ivc = feasible_interval(&st, &sc).unwrap();
        assert!((phi_plus(&st, &sc, ivc).unwrap().value - c * c * plus.value).abs() < 1e-6 * plus.value);
        assert!((phi_minus(&st, &sc, ivc).unwrap().value - c * c * minus.value).abs() < 1e-6 * minus.value);
    }

    #[test]
    fn window_examples() {
        let p = AuxParams::new(400, 20000, 1.0).unwrap();
        let w = sparsity_window(&p, 1e-9).unwrap();
        assert!(w.s_lower >= 399 && w.s_upper <= 401);
        let w1 = sparsity_window(&p, 1.0).unwrap();
        let w15 = sparsity_window(&p, 1.5).unwrap();
        assert!(w15.s_lower <= w1.s_lower && w15.s_upper >= w1.s_upper);
        assert!((w1.approx_lower - 322.6).abs() < 0.5 && (w1.approx_upper - 495.9).abs() < 0.5);
        assert!(sparsity_window(&p, 0.0).is_err());
        assert!(sparsity_window(&p, 2.0).is_err());
    }
}
