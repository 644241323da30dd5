//! Standard-normal tail machinery: the complementary CDF `Φ̄`, the Mills-ratio
//! factor `h`, the two-sided quantile `t_s` with `2Φ̄(t_s) = s/d`, its closed
//! form estimate `t̄_s`, and truncated conditional moments.
//!
//! `Φ̄` is evaluated from a Taylor series of `Φ` near the origin and from the
//! Laplace continued fraction of the Mills ratio in the tail. The Gaussian
//! density is computed with a split exponent so that `exp(−x²/2)` keeps full
//! relative precision out to the underflow threshold.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
/// Below this the series for `Φ` is used; above it the continued fraction.
const SERIES_LIMIT: f64 = 1.5;

/// Standard normal density with a split exponent.
pub fn normal_pdf(x: f64) -> f64 {
    let x = x.abs();
    let hi = (x * 65536.0).trunc() / 65536.0;
    let lo = x - hi;
    INV_SQRT_2PI * (-0.5 * hi * hi).exp() * (-0.5 * lo * (x + hi)).exp()
}

/// `Σ_k x^{2k+1} / (2k+1)!!`, so that `Φ(x) = ½ + φ(x)·S(x)`.
fn phi_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 1.0;
    loop {
        term *= x2 / (2.0 * k + 1.0);
        sum += term;
        if term <= 1e-17 * sum {
            return sum;
        }
        k += 1.0;
    }
}

/// Mills ratio `Φ̄(x)/φ(x)` for `x > 0` via the continued fraction
/// `1/(x + 1/(x + 2/(x + 3/(x + …))))`, evaluated with the modified Lentz
/// algorithm.
fn mills_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..20_000 {
        let a = k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Mills ratio `R(x) = Φ̄(x)/φ(x)` for `x ≥ 0`.
pub fn mills_ratio(x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x < SERIES_LIMIT {
        (0.5 - normal_pdf(x) * phi_series(x)) / normal_pdf(x)
    } else {
        mills_continued_fraction(x)
    }
}

/// Complementary standard-normal CDF `Φ̄(x) = P(Z > x)`.
///
/// Relative accuracy is near machine precision while the result is a normal
/// f64, i.e. up to `x ≈ 37.5`; past that it degrades through the subnormal
/// range and underflows to zero near `x ≈ 38.5`.
pub fn phi_c(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 1.0 - phi_c(-x);
    }
    if x < SERIES_LIMIT {
        0.5 - normal_pdf(x) * phi_series(x)
    } else if x.is_infinite() {
        0.0
    } else {
        normal_pdf(x) * mills_continued_fraction(x)
    }
}

/// `ln Φ̄(x)`, finite for every finite `x` including deep in the tail.
pub fn ln_phi_c(x: f64) -> f64 {
    if x < SERIES_LIMIT {
        phi_c(x).ln()
    } else {
        -0.5 * x * x - LN_SQRT_2PI + mills_continued_fraction(x).ln()
    }
}

/// `h(x) = Φ̄(x)·x·√(2π)·exp(x²/2) = x·R(x)`, for `x > 0`.
pub fn h_factor(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("h(x) needs finite x > 0, got {x}")));
    }
    Ok(x * mills_ratio(x))
}

/// `(E[Z | Z ≥ x], E[Z² | Z ≥ x]) = (x/h(x), 1 + x²/h(x))` for `x > 0`.
pub fn truncated_moments(x: f64) -> Result<(f64, f64)> {
    let h = h_factor(x)?;
    Ok((x / h, 1.0 + x * x / h))
}

/// Constants of the quantile sandwich `t̄² − c1 ≤ t² ≤ t̄²`, asserted when `d ≥ cl·s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SandwichConstants {
    pub cl: f64,
    pub c1: f64,
}

impl Default for SandwichConstants {
    fn default() -> Self {
        Self { cl: 11.0, c1: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SandwichVerdict {
    /// `t̄² − c1 ≤ t² ≤ t̄²`.
    pub t_bar_bounds: bool,
    /// `log(d/s) ≤ t² ≤ 2 log(d/s)`.
    pub log_bounds: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantilePair {
    pub s: u64,
    pub d: u64,
    /// Solution of `2Φ̄(t) = s/d`.
    pub t: f64,
    /// `sqrt(2 log(d/s) − log log(d/s) − log(π/2))`; `None` when `d/s ≤ e`.
    pub t_bar: Option<f64>,
    /// Present when `d ≥ cl·s`.
    pub sandwich: Option<SandwichVerdict>,
}

/// Closed-form estimate `t̄_s`, defined for `d/s > e`.
pub fn t_bar(s: u64, d: u64) -> Option<f64> {
    let ratio = d as f64 / s as f64;
    if ratio <= std::f64::consts::E {
        return None;
    }
    let l = ratio.ln();
    Some((2.0 * l - l.ln() - (PI / 2.0).ln()).sqrt())
}

pub fn t_quantile(s: u64, d: u64) -> Result<QuantilePair> {
    t_quantile_with(s, d, &SandwichConstants::default())
}

pub fn t_quantile_with(s: u64, d: u64, consts: &SandwichConstants) -> Result<QuantilePair> {
    if s == 0 || s > d {
        return Err(Error::Domain(format!("t_quantile needs 1 ≤ s ≤ d, got s={s}, d={d}")));
    }
    let t = solve_two_sided_quantile(s as f64 / d as f64);
    let t_bar = t_bar(s, d);
    let sandwich = (d as f64 >= consts.cl * s as f64).then(|| {
        let t2 = t * t;
        let log_ratio = (d as f64 / s as f64).ln();
        let tb2 = t_bar.map(|v| v * v).unwrap_or(f64::NAN);
        SandwichVerdict {
            t_bar_bounds: tb2 - consts.c1 <= t2 && t2 <= tb2,
            log_bounds: log_ratio <= t2 && t2 <= 2.0 * log_ratio,
        }
    });
    Ok(QuantilePair { s, d, t, t_bar, sandwich })
}

/// Solves `2Φ̄(t) = p` for `p ∈ (0, 1]` via Newton on `ln(2Φ̄(t))`,
/// safeguarded by bisection on `[0, 40]`.
pub fn solve_two_sided_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p <= 1.0, "p must lie in (0, 1]");
    if p == 1.0 {
        return 0.0;
    }
    let target = (0.5 * p).ln();
    let f = |t: f64| ln_phi_c(t) - target;
    let (mut lo, mut hi) = (0.0_f64, 40.0_f64);
    let l = (1.0 / p).ln();
    let mut t = if l > 1.0 {
        (2.0 * l - l.ln() - (PI / 2.0).ln()).max(0.0).sqrt()
    } else {
        1.0
    };
    for _ in 0..200 {
        let ft = f(t);
        if ft == 0.0 {
            return t;
        }
        // ln Φ̄ is decreasing.
        if ft > 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        // d/dt ln Φ̄(t) = −1/R(t)
        let slope = -1.0 / mills_ratio(t);
        let mut next = t - ft / slope;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * (1.0 + t) || hi - lo <= 1e-16 * (1.0 + t) {
            return next;
        }
        t = next;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn phi_c_examples() {
        assert_eq!(phi_c(0.0), 0.5);
        assert!(rel(phi_c(1.0), 0.158_655_253_931_457_05) < 1e-14);
    }

    #[test]
    fn phi_c_far_tail_underflows_cleanly() {
        // Φ̄(40) ≈ 3.7e-350 is below the smallest f64 subnormal.
        let v = phi_c(40.0);
        assert!(v >= 0.0 && v <= 1e-300);
        assert!(phi_c(37.0) > 0.0);
        let ln = ln_phi_c(40.0);
        assert!((ln - -804.608_442_013_754_9).abs() < 1e-9, "{ln}");
    }

    #[test]
    fn series_and_fraction_agree_at_switch() {
        let x = SERIES_LIMIT;
        let series = 0.5 - normal_pdf(x) * phi_series(x);
        let cf = normal_pdf(x) * mills_continued_fraction(x);
        assert!(rel(series, cf) < 1e-14);
    }

    #[test]
    fn h_examples() {
        let h1 = h_factor(1.0).unwrap();
        assert!((h1 - 0.655_679_542_418_798_5).abs() < 1e-14);
        assert!((0.5..=1.0).contains(&h1));
        let h10 = h_factor(10.0).unwrap();
        let series = 1.0 - 0.01 + 0.0003 - 1.5e-5;
        assert!((h10 - series).abs() <= 105.0 / 1e8);
        let h01 = h_factor(0.1).unwrap();
        assert!(1.0 - 1.0 / 1.01 <= h01 && h01 <= 1.0);
        assert!(matches!(h_factor(0.0), Err(Error::Domain(_))));
        assert!(matches!(h_factor(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn truncated_moment_examples() {
        let (m1, m2) = truncated_moments(1.0).unwrap();
        let direct = (-0.5_f64).exp() / ((2.0 * PI).sqrt() * phi_c(1.0));
        assert!(rel(m1, direct) < 1e-14);
        assert!((m1 - 1.525_135_276_160_981).abs() < 1e-12);
        assert!((m2 - (1.0 + m1)).abs() < 1e-15);
        let (m1, _) = truncated_moments(20.0).unwrap();
        let ratio = m1 / 20.0;
        assert!((1.0..=1.0 + 3.0 / 400.0).contains(&ratio));
        assert!(truncated_moments(0.0).is_err());
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(t_quantile(100, 100).unwrap().t, 0.0);
        let q = t_quantile(50, 100).unwrap();
        assert!((q.t - 0.674_489_750_196_081_7).abs() < 1e-12);
        let q = t_quantile(400, 20000).unwrap();
        assert!((q.t * q.t - 5.411_894_431_054_339).abs() < 1e-9);
        let tb = q.t_bar.unwrap();
        assert!((tb * tb - 6.008_408_672_678_391).abs() < 1e-12);
        assert_eq!(q.sandwich, Some(SandwichVerdict { t_bar_bounds: true, log_bounds: true }));
        assert!(t_quantile(0, 10).is_err());
        assert!(t_quantile(11, 10).is_err());
        assert!(t_quantile(5, 10).unwrap().t_bar.is_none());
    }
}
