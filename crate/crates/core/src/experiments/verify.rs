//! Verification sweeps over Gaussian draws of `H`, shared by the CLI
//! (`path-verify`, `aux-verify`) and the acceptance suite.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::csv::fmt_f64;
use super::with_pool;
use crate::auxiliary::{auxiliary_report, AuxParams, FeasibleInterval};
use crate::datagen::gaussian_vector;
use crate::error::Result;
use crate::optim::{solve_path_qp, QpOptions};
use crate::path::{abs_order_stats, verify_monotonicity, PathState};

/// Relative tolerance on `‖γ(α)‖₁ = α` and `⟨γ(α), H⟩ = ‖H‖∞`.
pub const SATURATION_TOL: f64 = 1e-10;
/// Closed form evaluated directly at `α_s` vs through the segment interpolation.
pub const CONTINUITY_TOL: f64 = 1e-9;
pub const QP_TOL: f64 = 1e-6;
/// The QP cross-check is skipped above this dimension.
pub const QP_MAX_D: usize = 50;

#[derive(Clone, Debug, PartialEq)]
pub struct PathVerifyRow {
    pub draw: u64,
    pub d: usize,
    pub max_l1_rel: f64,
    pub max_inner_rel: f64,
    pub max_continuity: f64,
    pub monotonicity_violations: usize,
    pub max_qp_diff: Option<f64>,
    /// `true` when the draw produced ties or zeros in `|H|`.
    pub degenerate: bool,
    pub error: Option<String>,
}

impl PathVerifyRow {
    pub fn pass(&self) -> bool {
        self.error.is_none()
            && self.max_l1_rel <= SATURATION_TOL
            && self.max_inner_rel <= SATURATION_TOL
            && self.max_continuity <= CONTINUITY_TOL
            && self.monotonicity_violations == 0
            && self.max_qp_diff.is_none_or(|v| v <= QP_TOL)
    }
}

/// `count` values spread evenly over the interior of `[1, α_max]`.
pub fn alpha_grid(state: &PathState, count: usize) -> Vec<f64> {
    let top = state.alpha_max();
    (0..count).map(|k| 1.0 + (top - 1.0) * (k as f64 + 0.5) / count as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn verify_path_state(state: &PathState, draw: u64, alpha_count: usize, qp_alphas: usize) -> PathVerifyRow {
    let d = state.d();
    let mut row = PathVerifyRow {
        draw,
        d,
        max_l1_rel: 0.0,
        max_inner_rel: 0.0,
        max_continuity: 0.0,
        monotonicity_violations: 0,
        max_qp_diff: None,
        degenerate: state.diagnostics().is_degenerate(),
        error: None,
    };
    let res: Result<()> = (|| {
        let hinf = state.h_inf();
        for a in alpha_grid(state, alpha_count) {
            let g = state.gamma(a)?;
            row.max_l1_rel = row.max_l1_rel.max(rel(g.l1, a));
            row.max_inner_rel = row.max_inner_rel.max(rel(g.inner_h, hinf));
        }
        for s in 2..=d {
            let direct = state.gamma_at_breakpoint(s)?;
            let interp = state.gamma(direct.alpha)?;
            let gap = direct.w.iter().zip(&interp.w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            row.max_continuity = row.max_continuity.max(gap);
        }
        row.monotonicity_violations = verify_monotonicity(state, 5)?.violations.len();
        if d <= QP_MAX_D && qp_alphas > 0 {
            let mut worst = 0.0f64;
            for a in alpha_grid(state, qp_alphas) {
                let g = state.gamma(a)?;
                let qp = solve_path_qp(state.h(), hinf, a, &QpOptions::default())?;
                let diff = g.w.iter().zip(&qp.w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                worst = worst.max(diff);
            }
            row.max_qp_diff = Some(worst);
        }
        Ok(())
    })();
    if let Err(e) = res {
        row.error = Some(e.to_string());
    }
    row
}

/// One row per Gaussian draw `H ~ N(0, I_d)`, draws `0..draws` of `seed`.
pub fn path_verify(d: usize, draws: usize, seed: u64, alpha_count: usize, threads: usize) -> Result<Vec<PathVerifyRow>> {
    with_pool(threads, || {
        (0..draws as u64)
            .into_par_iter()
            .map(|k| match abs_order_stats(&gaussian_vector(d, seed, k)) {
                Ok(state) => verify_path_state(&state, k, alpha_count, 20),
                Err(e) => PathVerifyRow {
                    draw: k,
                    d,
                    max_l1_rel: f64::NAN,
                    max_inner_rel: f64::NAN,
                    max_continuity: f64::NAN,
                    monotonicity_violations: 0,
                    max_qp_diff: None,
                    degenerate: true,
                    error: Some(e.to_string()),
                },
            })
            .collect()
    })
}

pub fn path_verify_csv(rows: &[PathVerifyRow]) -> String {
    let mut out = String::from("draw,d,max_l1_rel,max_inner_rel,max_continuity,monotonicity_violations,max_qp_diff,degenerate,pass\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.draw,
            r.d,
            fmt_f64(r.max_l1_rel),
            fmt_f64(r.max_inner_rel),
            fmt_f64(r.max_continuity),
            r.monotonicity_violations,
            r.max_qp_diff.map(fmt_f64).unwrap_or_default(),
            r.degenerate,
            if r.pass() { "PASS" } else { "FAIL" },
        );
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxVerifyRow {
    pub draw: u64,
    pub phi_n: Option<f64>,
    pub alpha_n: Option<f64>,
    pub phi_plus: Option<f64>,
    pub phi_minus: Option<f64>,
    pub interval: Option<(f64, f64)>,
    /// `(α_{s̲}, α_{s̄})` for `λ = 1`.
    pub window_alphas: Option<(f64, f64)>,
    pub m: Option<f64>,
    pub target_rate: f64,
    pub error: Option<String>,
}

impl AuxVerifyRow {
    /// `φ₋ ≤ φ₊` whenever the interval is nonempty.
    pub fn ordered(&self) -> bool {
        match (self.interval, self.phi_plus, self.phi_minus) {
            (None, _, _) => true,
            (Some(_), Some(p), Some(m)) => m <= p,
            _ => false,
        }
    }

    pub fn in_band(&self, lo: f64, hi: f64) -> bool {
        let ok = |v: Option<f64>| v.is_some_and(|v| v >= lo * self.target_rate && v <= hi * self.target_rate);
        ok(self.phi_plus) && ok(self.phi_minus)
    }

    pub fn phi_n_below_m(&self, factor: f64) -> bool {
        matches!((self.phi_n, self.m), (Some(p), Some(m)) if p <= factor * m)
    }

    pub fn argmin_in_window(&self) -> bool {
        matches!((self.alpha_n, self.window_alphas), (Some(a), Some((lo, hi))) if lo <= a && a <= hi)
    }

    /// `α_{s̲} < α_low ≤ α_n ≤ α_high ≤ α_{s̄}`.
    pub fn interval_nested(&self) -> bool {
        matches!(
            (self.alpha_n, self.interval, self.window_alphas),
            (Some(a), Some((l, h)), Some((wl, wh))) if wl < l && l <= a && a <= h && h <= wh
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuxSummary {
    pub draws: usize,
    pub errors: usize,
    pub all_ordered: bool,
    pub band_fraction: f64,
    pub phi_n_fraction: f64,
    pub window_fraction: f64,
    pub nested_fraction: f64,
    pub mean_phi_plus: f64,
    pub mean_phi_minus: f64,
}

impl AuxSummary {
    pub fn pass(&self) -> bool {
        self.errors == 0 && self.all_ordered && self.band_fraction >= 0.9 && self.phi_n_fraction >= 0.9
    }
}

pub fn aux_verify_draw(params: &AuxParams, seed: u64, draw: u64) -> AuxVerifyRow {
    let mut row = AuxVerifyRow {
        draw,
        phi_n: None,
        alpha_n: None,
        phi_plus: None,
        phi_minus: None,
        interval: None,
        window_alphas: None,
        m: None,
        target_rate: params.target_rate(),
        error: None,
    };
    let res: Result<()> = (|| {
        let state = abs_order_stats(&gaussian_vector(params.d, seed, draw))?;
        let rep = auxiliary_report(&state, params, 1.0)?;
        row.phi_n = rep.phi_n.map(|o| o.value);
        row.alpha_n = rep.phi_n.map(|o| o.alpha);
        row.phi_plus = rep.phi_plus.map(|o| o.value);
        row.phi_minus = rep.phi_minus.map(|o| o.value);
        row.interval = match rep.interval {
            FeasibleInterval::Empty => None,
            FeasibleInterval::Interval { low, high } => Some((low, high)),
        };
        row.m = rep.m;
        row.window_alphas = rep.window.and_then(|w| {
            let ok = |s: usize| (2..=params.d + 1).contains(&s);
            (ok(w.s_lower) && ok(w.s_upper)).then(|| (state.breakpoint(w.s_lower), state.breakpoint(w.s_upper)))
        });
        Ok(())
    })();
    if let Err(e) = res {
        row.error = Some(e.to_string());
    }
    row
}

pub fn aux_verify(params: &AuxParams, draws: usize, seed: u64, threads: usize) -> Result<(Vec<AuxVerifyRow>, AuxSummary)> {
    params.validate()?;
    let rows: Vec<AuxVerifyRow> =
        with_pool(threads, || (0..draws as u64).into_par_iter().map(|k| aux_verify_draw(params, seed, k)).collect())?;
    let summary = summarize_aux(&rows);
    Ok((rows, summary))
}

pub fn summarize_aux(rows: &[AuxVerifyRow]) -> AuxSummary {
    let n = rows.len().max(1) as f64;
    let frac = |f: &dyn Fn(&AuxVerifyRow) -> bool| rows.iter().filter(|r| f(r)).count() as f64 / n;
    let mean = |f: &dyn Fn(&AuxVerifyRow) -> Option<f64>| {
        let v: Vec<f64> = rows.iter().filter_map(f).collect();
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    AuxSummary {
        draws: rows.len(),
        errors: rows.iter().filter(|r| r.error.is_some()).count(),
        all_ordered: rows.iter().all(AuxVerifyRow::ordered),
        band_fraction: frac(&|r| r.in_band(0.4, 2.5)),
        phi_n_fraction: frac(&|r| r.phi_n_below_m(1.05)),
        window_fraction: frac(&|r| r.argmin_in_window()),
        nested_fraction: frac(&|r| r.interval_nested()),
        mean_phi_plus: mean(&|r| r.phi_plus),
        mean_phi_minus: mean(&|r| r.phi_minus),
    }
}

pub fn aux_verify_csv(rows: &[AuxVerifyRow], summary: &AuxSummary) -> String {
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    let mut out = String::from(
        "row,phi_n,alpha_n,phi_plus,phi_minus,alpha_low,alpha_high,alpha_s_lower,alpha_s_upper,m,target_rate,status\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.draw,
            opt(r.phi_n),
            opt(r.alpha_n),
            opt(r.phi_plus),
            opt(r.phi_minus),
            opt(r.interval.map(|i| i.0)),
            opt(r.interval.map(|i| i.1)),
            opt(r.window_alphas.map(|i| i.0)),
            opt(r.window_alphas.map(|i| i.1)),
            opt(r.m),
            fmt_f64(r.target_rate),
            r.error.as_deref().map(|e| e.replace(',', ";")).unwrap_or_else(|| "ok".into()),
        );
    }
    let _ = writeln!(
        out,
        "summary,,,{},{},,,,,,{},ordered={};band={:.3};phi_n_le_1.05M={:.3};argmin_in_window={:.3};nested={:.3};errors={};{}",
        fmt_f64(summary.mean_phi_plus),
        fmt_f64(summary.mean_phi_minus),
        rows.first().map(|r| fmt_f64(r.target_rate)).unwrap_or_default(),
        summary.all_ordered,
        summary.band_fraction,
        summary.phi_n_fraction,
        summary.window_fraction,
        summary.nested_fraction,
        summary.errors,
        if summary.pass() { "PASS" } else { "FAIL" },
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_path_sweep_passes() {
        let rows = path_verify(8, 5, 3, 20, 2).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows {
            assert!(r.pass(), "{r:?}");
            assert!(r.max_qp_diff.is_some());
        }
        let csv = path_verify_csv(&rows);
        assert_eq!(csv.lines().count(), 6);
    }

    #[test]
    fn aux_rows_are_ordered() {
        let params = AuxParams::new(20, 1000, 1.0).unwrap();
        let (rows, summary) = aux_verify(&params, 4, 1, 2).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(summary.all_ordered);
        assert_eq!(summary.errors, 0);
        assert_eq!(aux_verify_csv(&rows, &summary).lines().count(), 6);
    }
}
