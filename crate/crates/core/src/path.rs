//! The parametric path `γ(α)`: for sorted absolute order statistics `H`,
//! `γ(α)` is the minimum-ℓ2-norm point of
//! `{w ≥ 0, 1ᵀw = α, ⟨w, H⟩ ≥ ‖H‖∞}`, for `α ∈ [1, α_max]`.
//!
//! The path is piecewise affine. Its support grows by one coordinate at each
//! breakpoint `α_s`, where it equals `‖H‖∞ / ⟨v_s, H⟩ · v_s` with
//! `v_s = H_[s] − H_s·1_[s]`. Between breakpoints the path is evaluated by
//! interpolating these points.
//!
//! The statistics `‖v_s‖₁`, `‖v_s‖₂²` and `⟨v_s, H⟩` follow recurrences with
//! nonnegative increments, so every cached quantity is computed without
//! cancellation, even when neighbouring order statistics nearly coincide.

use crate::error::{Error, Result};
use crate::quantiles::{t_quantile, QuantilePair};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathDiagnostics {
    /// Adjacent equal pairs in the sorted `|h|` (broken by original index).
    pub ties: usize,
    /// Entries equal to zero.
    pub zeros: usize,
}

impl PathDiagnostics {
    pub fn is_degenerate(&self) -> bool {
        self.ties > 0 || self.zeros > 0
    }
}

/// Point of the path at a breakpoint, restricted to its leading block.
#[derive(Clone, Copy, Debug)]
struct Knot {
    alpha: f64,
    /// `γ(α_s) = scale·(H_[s] − shift·1_[s])`.
    scale: f64,
    shift: f64,
    /// Duals at the knot: `γ(α_s) = λH_[s] − μ1_[s]`.
    lambda: f64,
    mu: f64,
    l2sq: f64,
    /// `⟨γ(α_s), γ(α_{s+1})⟩`.
    cross_next: f64,
}

#[derive(Clone, Debug)]
pub struct PathState {
    h: Vec<f64>,
    order: Vec<usize>,
    prefix_l1: Vec<f64>,
    prefix_l2sq: Vec<f64>,
    /// `knots[s]` for `s ∈ 2..=d+1`; the last is the constant vector at `α_max`.
    knots: Vec<Knot>,
    alpha_diamond: f64,
    diagnostics: PathDiagnostics,
}

/// `γ(α)` with its duals and norms. Norms are computed from `w` itself.
#[derive(Clone, Debug)]
pub struct GammaPoint {
    pub alpha: f64,
    pub segment_s: usize,
    pub w: Vec<f64>,
    pub lambda: f64,
    pub mu: f64,
    pub l1: f64,
    pub l2sq: f64,
    pub inner_h: f64,
}

/// `γ(α)` without materializing `w`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaNorms {
    pub alpha: f64,
    pub segment_s: usize,
    pub lambda: f64,
    pub mu: f64,
    pub l2sq: f64,
}

/// Sorts `|h|` descending (stable, so ties keep index order) and builds the path.
pub fn abs_order_stats(h: &[f64]) -> Result<PathState> {
    let d = h.len();
    if d < 2 {
        return Err(Error::Domain(format!("path needs d ≥ 2, got {d}")));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("path input must be finite".into()));
    }
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| h[b].abs().total_cmp(&h[a].abs()));
    let sorted: Vec<f64> = order.iter().map(|&i| h[i].abs()).collect();
    if sorted[0] == 0.0 {
        return Err(Error::Domain("path input is identically zero".into()));
    }
    let diagnostics = PathDiagnostics {
        ties: sorted.windows(2).filter(|w| w[0] == w[1]).count(),
        zeros: sorted.iter().filter(|&&v| v == 0.0).count(),
    };
    Ok(PathState::from_sorted(sorted, order, diagnostics))
}

impl PathState {
    fn from_sorted(h: Vec<f64>, order: Vec<usize>, diagnostics: PathDiagnostics) -> Self {
        let d = h.len();
        let hinf = h[0];
        let mut prefix_l1 = vec![0.0; d + 1];
        let mut prefix_l2sq = vec![0.0; d + 1];
        for i in 0..d {
            prefix_l1[i + 1] = prefix_l1[i] + h[i];
            prefix_l2sq[i + 1] = prefix_l2sq[i] + h[i] * h[i];
        }

        // v_s statistics by recurrence over s (1-based): v_1 = 0.
        let mut a = 0.0; // ‖v_s‖₁
        let mut q = 0.0; // ‖v_s‖₂²
        let mut inner = 0.0; // ⟨v_s, H⟩
        let placeholder = Knot { alpha: f64::NAN, scale: 0.0, shift: 0.0, lambda: 0.0, mu: 0.0, l2sq: 0.0, cross_next: 0.0 };
        let mut knots = vec![placeholder; d + 2];
        let mut vq = vec![0.0; d + 1];
        let mut va = vec![0.0; d + 1];
        for s in 1..d {
            // from v_s to v_{s+1}
            let delta = h[s - 1] - h[s];
            let sf = s as f64;
            q += 2.0 * delta * a + sf * delta * delta;
            inner += delta * prefix_l1[s];
            a += sf * delta;
            let s1 = s + 1;
            vq[s1] = q;
            va[s1] = a;
            knots[s1] = if inner > 0.0 {
                let c = hinf / inner;
                Knot { alpha: c * a, scale: c, shift: h[s], lambda: c, mu: c * h[s], l2sq: c * c * q, cross_next: 0.0 }
            } else {
                // Tied leading block: use the index tie-break limit e₁.
                Knot { alpha: 1.0, scale: 0.0, shift: 0.0, lambda: 0.0, mu: 0.0, l2sq: 1.0, cross_next: 0.0 }
            };
        }
        knots[2].alpha = 1.0;
        let c_end = hinf / prefix_l1[d];
        knots[d + 1] = Knot {
            alpha: d as f64 * c_end,
            scale: 0.0,
            shift: -c_end,
            lambda: 0.0,
            mu: -c_end,
            l2sq: d as f64 * c_end * c_end,
            cross_next: f64::NAN,
        };
        for s in 2..=d {
            let k = knots[s];
            knots[s].cross_next = if s == d {
                // ⟨c v_d, c_end·1⟩
                k.scale * c_end * va[d]
            } else if k.scale == 0.0 {
                // e₁ against the next knot
                let n = knots[s + 1];
                n.scale * (h[0] - n.shift)
            } else {
                // ⟨v_s, v_{s+1}⟩ = ‖v_s‖² + δ_s‖v_s‖₁
                let delta = h[s - 1] - h[s];
                k.scale * knots[s + 1].scale * (vq[s] + delta * va[s])
            };
        }
        // Monotone repair for rounding in nearly tied stretches.
        for s in 3..=d + 1 {
            if knots[s].alpha < knots[s - 1].alpha {
                knots[s].alpha = knots[s - 1].alpha;
            }
        }
        let alpha_diamond = prefix_l1[d] * hinf / prefix_l2sq[d];
        Self { h, order, prefix_l1, prefix_l2sq, knots, alpha_diamond, diagnostics }
    }

    pub fn d(&self) -> usize {
        self.h.len()
    }

    /// Sorted order statistics, strictly decreasing when no ties were flagged.
    pub fn h(&self) -> &[f64] {
        &self.h
    }

    /// `order[k]` is the original index of `h()[k]`.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn h_inf(&self) -> f64 {
        self.h[0]
    }

    /// `‖H_[s]‖₁` for `s ∈ 0..=d`.
    pub fn prefix_l1(&self, s: usize) -> f64 {
        self.prefix_l1[s]
    }

    /// `‖H_[s]‖₂²` for `s ∈ 0..=d`.
    pub fn prefix_l2sq(&self, s: usize) -> f64 {
        self.prefix_l2sq[s]
    }

    /// `α_s` for `s ∈ 2..=d+1`.
    pub fn breakpoint(&self, s: usize) -> f64 {
        assert!((2..=self.d() + 1).contains(&s), "breakpoint index {s} outside 2..=d+1");
        self.knots[s].alpha
    }

    /// `α_2, …, α_{d+1}`.
    pub fn breakpoints(&self) -> Vec<f64> {
        (2..=self.d() + 1).map(|s| self.knots[s].alpha).collect()
    }

    pub fn alpha_max(&self) -> f64 {
        self.knots[self.d() + 1].alpha
    }

    /// Minimizer of `‖γ(α)‖₂²` over the path.
    pub fn alpha_diamond(&self) -> f64 {
        self.alpha_diamond
    }

    pub fn diagnostics(&self) -> &PathDiagnostics {
        &self.diagnostics
    }

    fn check_alpha(&self, alpha: f64) -> Result<f64> {
        let amax = self.alpha_max();
        let slack = 1e-12 * amax;
        if !(alpha >= 1.0 - slack && alpha <= amax + slack) {
            return Err(Error::Domain(format!("alpha {alpha} outside [1, {amax}]")));
        }
        Ok(alpha.clamp(1.0, amax))
    }

    /// Smallest `s ≥ 2` with `α ≤ α_{s+1}`.
    pub fn segment(&self, alpha: f64) -> usize {
        let d = self.d();
        let upper = &self.knots[3..=d + 1];
        (2 + upper.partition_point(|k| k.alpha < alpha)).min(d)
    }

    /// Segment, interpolation weight, and the two knots bounding it.
    fn locate(&self, alpha: f64) -> (usize, f64, Knot, Knot) {
        let s = self.segment(alpha);
        let (k0, k1) = (self.knots[s], self.knots[s + 1]);
        let width = k1.alpha - k0.alpha;
        let t = if width > 0.0 { ((alpha - k0.alpha) / width).clamp(0.0, 1.0) } else { 0.0 };
        (s, t, k0, k1)
    }

    /// Duals `λ, μ` with `γ(α) = λH_[s] − μ1_[s]`.
    fn duals(t: f64, k0: &Knot, k1: &Knot) -> (f64, f64) {
        let lambda = (1.0 - t) * k0.lambda + t * k1.lambda;
        let mu = (1.0 - t) * k0.mu + t * k1.mu;
        (lambda, mu)
    }

    /// `γ(α)` norms in O(log d).
    pub fn gamma_norms(&self, alpha: f64) -> Result<GammaNorms> {
        let alpha = self.check_alpha(alpha)?;
        let (s, t, k0, k1) = self.locate(alpha);
        let (lambda, mu) = Self::duals(t, &k0, &k1);
        let l2sq = (1.0 - t) * (1.0 - t) * k0.l2sq + 2.0 * t * (1.0 - t) * k0.cross_next + t * t * k1.l2sq;
        Ok(GammaNorms { alpha, segment_s: s, lambda, mu, l2sq })
    }

    /// `‖γ(α)‖₂²`, or `+∞` outside the path domain.
    pub fn gamma_l2sq(&self, alpha: f64) -> f64 {
        self.gamma_norms(alpha).map_or(f64::INFINITY, |g| g.l2sq)
    }

    fn knot_coord(&self, k: &Knot, i: usize) -> f64 {
        if k.scale == 0.0 && k.shift == 0.0 {
            // e₁ fallback for a tied leading block
            if i == 0 { 1.0 } else { 0.0 }
        } else if k.scale == 0.0 {
            -k.shift
        } else {
            (k.scale * (self.h[i] - k.shift)).max(0.0)
        }
    }

    fn point(&self, alpha: f64, s: usize, w: Vec<f64>, lambda: f64, mu: f64) -> GammaPoint {
        let l1 = w.iter().sum();
        let l2sq = w.iter().map(|x| x * x).sum();
        let inner_h = w.iter().zip(&self.h).map(|(a, b)| a * b).sum();
        GammaPoint { alpha, segment_s: s, w, lambda, mu, l1, l2sq, inner_h }
    }

    /// `γ(α)` in the sorted coordinates of `H`.
    pub fn gamma(&self, alpha: f64) -> Result<GammaPoint> {
        let alpha = self.check_alpha(alpha)?;
        let (s, t, k0, k1) = self.locate(alpha);
        let (lambda, mu) = Self::duals(t, &k0, &k1);
        let mut w = vec![0.0; self.d()];
        for (i, wi) in w.iter_mut().enumerate().take(s) {
            *wi = (1.0 - t) * self.knot_coord(&k0, i) + t * self.knot_coord(&k1, i);
        }
        Ok(self.point(alpha, s, w, lambda, mu))
    }

    /// `γ(α_s) = ‖H‖∞/⟨v_s, H⟩ · v_s`, computed directly from `v_s`.
    pub fn gamma_at_breakpoint(&self, s: usize) -> Result<GammaPoint> {
        let d = self.d();
        if !(2..=d).contains(&s) {
            return Err(Error::Domain(format!("breakpoint index {s} outside 2..={d}")));
        }
        let hs = self.h[s - 1];
        let v: Vec<f64> = self.h[..s].iter().map(|&x| x - hs).collect();
        let inner: f64 = v.iter().zip(&self.h).map(|(a, b)| a * b).sum();
        let mut w = vec![0.0; d];
        let (lambda, mu) = if inner > 0.0 {
            let c = self.h_inf() / inner;
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi = c * vi;
            }
            (c, c * hs)
        } else {
            w[0] = 1.0;
            (0.0, -1.0)
        };
        Ok(self.point(self.knots[s].alpha, s, w, lambda, mu))
    }

    /// `γ(α)` scattered back to the original (unsorted, signed) coordinates
    /// of the input vector: `w_orig[order[k]] = sign(h[order[k]])·w[k]`.
    pub fn unsort(&self, w_sorted: &[f64], original: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; w_sorted.len()];
        for (k, &i) in self.order.iter().enumerate() {
            out[i] = w_sorted[k] * original[i].signum();
        }
        out
    }
}

/// Deterministic predictions for the path near `α_s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PathNormEstimates {
    pub quantile: QuantilePair,
    /// `‖γ(α_s)‖₁/‖H‖∞ ≈ 1/t − 2/t³`.
    pub l1_over_hinf: f64,
    /// `‖γ(α_s)‖₂²/‖H‖∞² ≈ 2/(s t²)`.
    pub l2sq_over_hinf2: f64,
    /// `‖v_s‖₂² ≈ s(2/t² − 10/t⁴)`.
    pub v_l2sq: f64,
    /// `‖v_s‖₁ ≈ s(1/t − 2/t³)`.
    pub v_l1: f64,
    /// `⟨v_s, H⟩ ≈ s`.
    pub v_inner: f64,
}

pub fn path_norm_estimates(s: u64, d: u64) -> Result<PathNormEstimates> {
    if s == 0 || d < 11 * s {
        return Err(Error::Domain(format!("norm estimates need 11·s ≤ d, got s={s}, d={d}")));
    }
    let quantile = t_quantile(s, d)?;
    let t = quantile.t;
    let (t2, sf) = (t * t, s as f64);
    let l1 = 1.0 / t - 2.0 / (t2 * t);
    Ok(PathNormEstimates {
        quantile,
        l1_over_hinf: l1,
        l2sq_over_hinf2: 2.0 / (sf * t2),
        v_l2sq: sf * (2.0 / t2 - 10.0 / (t2 * t2)),
        v_l1: sf * l1,
        v_inner: sf,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MonotonicityCheck {
    /// `‖γ‖₂²` should not increase on `[1, α♦]`.
    DecreasingBeforeDiamond,
    /// `‖γ‖₂²` should not decrease on `[α♦, α_max]`.
    IncreasingAfterDiamond,
    /// Chord inequality on consecutive grid triples.
    Convexity,
    /// `‖γ‖₂²/α²` strictly decreasing.
    RatioDecreasing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotonicityViolation {
    pub check: MonotonicityCheck,
    pub alpha: f64,
    pub slack: f64,
}

#[derive(Clone, Debug, Default)]
pub struct MonotonicityReport {
    pub grid_points: usize,
    pub violations: Vec<MonotonicityViolation>,
}

impl MonotonicityReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the shape of `α ↦ ‖γ(α)‖₂²` on every breakpoint, `α♦`, and
/// `grid_size` interior points per segment.
///
/// Norms are evaluated from the materialized `γ(α)`. The two monotonicity
/// checks allow `1e-12` relative slack for rounding on flat stretches; the
/// convexity check allows `1e-9` absolute, the ratio check `1e-12` relative.
pub fn verify_monotonicity(state: &PathState, grid_size: usize) -> Result<MonotonicityReport> {
    if grid_size < 3 {
        return Err(Error::Domain(format!("grid_size must be ≥ 3, got {grid_size}")));
    }
    let d = state.d();
    let mut alphas = Vec::with_capacity((d + 1) * (grid_size + 1) + 1);
    for s in 2..=d {
        let (a0, a1) = (state.breakpoint(s), state.breakpoint(s + 1));
        alphas.push(a0);
        for k in 1..=grid_size {
            alphas.push(a0 + (a1 - a0) * k as f64 / (grid_size + 1) as f64);
        }
    }
    alphas.push(state.alpha_max());
    alphas.push(state.alpha_diamond());
    alphas.sort_by(f64::total_cmp);
    alphas.dedup();

    let f: Vec<f64> = alphas
        .iter()
        .map(|&a| state.gamma(a).map(|g| g.l2sq))
        .collect::<Result<_>>()?;
    let scale = f.iter().cloned().fold(0.0, f64::max);
    let diamond = state.alpha_diamond();
    let mut violations = Vec::new();
    let mut flag = |check, alpha, slack: f64| violations.push(MonotonicityViolation { check, alpha, slack });

    for k in 1..alphas.len() {
        let (a0, a1) = (alphas[k - 1], alphas[k]);
        let rise = f[k] - f[k - 1];
        if a1 <= diamond && rise > 1e-12 * scale {
            flag(MonotonicityCheck::DecreasingBeforeDiamond, a1, -rise);
        }
        if a0 >= diamond && -rise > 1e-12 * scale {
            flag(MonotonicityCheck::IncreasingAfterDiamond, a1, rise);
        }
        let (r0, r1) = (f[k - 1] / (a0 * a0), f[k] / (a1 * a1));
        if r1 - r0 > 1e-12 * r0 {
            flag(MonotonicityCheck::RatioDecreasing, a1, r0 - r1);
        }
    }
    for k in 1..alphas.len().saturating_sub(1) {
        let (a, b, c) = (alphas[k - 1], alphas[k], alphas[k + 1]);
        let chord = ((c - b) * f[k - 1] + (b - a) * f[k + 1]) / (c - a);
        let slack = chord - f[k];
        if slack < -1e-9 {
            flag(MonotonicityCheck::Convexity, b, slack);
        }
    }
    Ok(MonotonicityReport { grid_points: alphas.len(), violations })
}
