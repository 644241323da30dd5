//! Primal active-set method for the path program
//!
//! ```text
//! minimize ‖w‖₂²  subject to  ⟨w, q⟩ ≥ τ,  w ≥ 0,  1ᵀw = α.
//! ```
//!
//! The equality stays in the working set; the inequality on `q` and the
//! nonnegativity bounds enter and leave it. Each working-set subproblem is a
//! minimum-norm point on an affine set, solved through the Gram matrix of the
//! active rows.

use crate::error::{Error, Result};
use crate::optim::dense::{dot, norm_inf, Cholesky, Matrix};

#[derive(Clone, Debug, Default)]
pub struct QpOptions {
    /// Working-set changes allowed before giving up. Defaults to `10 · d`.
    pub max_swaps: Option<usize>,
    /// Support guess used to warm-start the working set.
    pub warm_support: Option<Vec<usize>>,
}

/// First-order optimality diagnostics at the returned point.
#[derive(Clone, Copy, Debug, Default)]
pub struct KktReport {
    pub stationarity: f64,
    pub complementarity: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
}

impl KktReport {
    pub fn satisfied(&self, tol: f64) -> bool {
        self.stationarity <= tol
            && self.complementarity <= tol
            && self.primal_infeasibility <= tol
            && self.dual_infeasibility <= tol
    }
}

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub w: Vec<f64>,
    /// Multiplier of `1ᵀw = α`.
    pub nu: f64,
    /// Multiplier of `⟨w, q⟩ ≥ τ`.
    pub lambda: f64,
    /// Multipliers of `w_i ≥ 0`.
    pub bound_multipliers: Vec<f64>,
    pub swaps: usize,
    pub kkt: KktReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Constraint {
    Sum,
    Inner,
    Bound(usize),
}

struct Program<'a> {
    q: &'a [f64],
    tau: f64,
    alpha: f64,
}

impl Program<'_> {
    fn d(&self) -> usize {
        self.q.len()
    }

    fn row(&self, c: Constraint) -> Vec<f64> {
        match c {
            Constraint::Sum => vec![1.0; self.d()],
            Constraint::Inner => self.q.to_vec(),
            Constraint::Bound(i) => {
                let mut e = vec![0.0; self.d()];
                e[i] = 1.0;
                e
            }
        }
    }

    fn rhs(&self, c: Constraint) -> f64 {
        match c {
            Constraint::Sum => self.alpha,
            Constraint::Inner => self.tau,
            Constraint::Bound(_) => 0.0,
        }
    }

    fn eval(&self, c: Constraint, w: &[f64]) -> f64 {
        match c {
            Constraint::Sum => w.iter().sum(),
            Constraint::Inner => dot(self.q, w),
            Constraint::Bound(i) => w[i],
        }
    }

    /// Minimum-norm point of `{w : a_c·w = b_c, c ∈ working}` and the
    /// multipliers of the working rows.
    fn project(&self, working: &[Constraint]) -> Result<(Vec<f64>, Vec<f64>)> {
        let rows: Vec<Vec<f64>> = working.iter().map(|&c| self.row(c)).collect();
        let r = rows.len();
        let mut gram = Matrix::zeros(r, r);
        for i in 0..r {
            for j in i..r {
                let v = dot(&rows[i], &rows[j]);
                gram[(i, j)] = v;
                gram[(j, i)] = v;
            }
        }
        let rhs: Vec<f64> = working.iter().map(|&c| self.rhs(c)).collect();
        let mult = Cholesky::factorize(&gram)?.solve(&rhs);
        let mut w = vec![0.0; self.d()];
        for (row, &m) in rows.iter().zip(&mult) {
            for (wi, ri) in w.iter_mut().zip(row) {
                *wi += m * ri;
            }
        }
        Ok((w, mult))
    }
}

/// Solves the path program for a given `q`, `τ` and `α`.
pub fn solve_path_qp(q: &[f64], tau: f64, alpha: f64, options: &QpOptions) -> Result<QpSolution> {
    let d = q.len();
    if d == 0 {
        return Err(Error::InvalidConfig("empty q".into()));
    }
    if !q.iter().all(|v| v.is_finite()) || !tau.is_finite() || !alpha.is_finite() {
        return Err(Error::InvalidConfig("non-finite QP data".into()));
    }
    let (imax, qmax) = q
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (i, v)| if v > b.1 { (i, v) } else { b });
    let scale = 1.0 + tau.abs();
    if alpha < 0.0 || alpha * qmax < tau - 1e-12 * scale {
        return Err(Error::QpInfeasible(format!(
            "max ⟨w,q⟩ over the slice is {:.6e} < τ = {tau:.6e}",
            alpha.max(0.0) * qmax
        )));
    }
    let prog = Program { q, tau, alpha };
    let max_swaps = options.max_swaps.unwrap_or(10 * d);

    let mut x;
    let mut working;
    match warm_start(&prog, options.warm_support.as_deref()) {
        Some((w0, ws)) => {
            x = w0;
            working = ws;
        }
        None => {
            x = vec![0.0; d];
            x[imax] = alpha;
            working = vec![Constraint::Sum];
            working.extend((0..d).filter(|&i| i != imax).map(Constraint::Bound));
        }
    }

    let mut swaps = 0;
    loop {
        let (target, mult) = prog.project(&working)?;
        let step: Vec<f64> = target.iter().zip(&x).map(|(t, xi)| t - xi).collect();
        let xscale = 1.0 + norm_inf(&x);
        if norm_inf(&step) <= 1e-13 * xscale {
            x = target;
            // The most negative inequality multiplier leaves the working set.
            let worst = working
                .iter()
                .zip(&mult)
                .filter(|(c, _)| **c != Constraint::Sum)
                .map(|(&c, &m)| (c, m))
                .fold(None, |acc: Option<(Constraint, f64)>, cur| match acc {
                    Some(a) if a.1 <= cur.1 => Some(a),
                    _ => Some(cur),
                });
            match worst {
                Some((c, m)) if m < -1e-12 * xscale => {
                    working.retain(|&w| w != c);
                }
                _ => return Ok(finish(&prog, x, &working, &mult, swaps)),
            }
        } else {
            let mut t = 1.0;
            let mut blocking = None;
            for c in all_inequalities(d) {
                if working.contains(&c) {
                    continue;
                }
                let slope = dot(&prog.row(c), &step);
                if slope < -1e-15 {
                    let slack = prog.eval(c, &x) - prog.rhs(c);
                    let tc = (slack.max(0.0) / -slope).max(0.0);
                    if tc < t {
                        t = tc;
                        blocking = Some(c);
                    }
                }
            }
            for (xi, si) in x.iter_mut().zip(&step) {
                *xi += t * si;
            }
            match blocking {
                Some(c) => working.push(c),
                None => continue,
            }
        }
        swaps += 1;
        if swaps > max_swaps {
            return Err(Error::MaxActiveSetSwaps(max_swaps));
        }
    }
}

fn all_inequalities(d: usize) -> impl Iterator<Item = Constraint> {
    std::iter::once(Constraint::Inner).chain((0..d).map(Constraint::Bound))
}

fn warm_start(prog: &Program<'_>, support: Option<&[usize]>) -> Option<(Vec<f64>, Vec<Constraint>)> {
    let support = support?;
    let d = prog.d();
    if support.is_empty() || support.iter().any(|&i| i >= d) {
        return None;
    }
    let mut in_support = vec![false; d];
    support.iter().for_each(|&i| in_support[i] = true);
    let mut working = vec![Constraint::Sum, Constraint::Inner];
    working.extend((0..d).filter(|&i| !in_support[i]).map(Constraint::Bound));
    let (w, _) = prog.project(&working).ok()?;
    let tol = 1e-12 * (1.0 + prog.alpha.abs());
    let feasible = w.iter().all(|&v| v >= -tol) && prog.eval(Constraint::Inner, &w) >= prog.tau - tol;
    feasible.then(|| (w.into_iter().map(|v| v.max(0.0)).collect(), working))
}

fn finish(prog: &Program<'_>, mut w: Vec<f64>, working: &[Constraint], mult: &[f64], swaps: usize) -> QpSolution {
    let d = prog.d();
    for (i, wi) in w.iter_mut().enumerate() {
        if working.contains(&Constraint::Bound(i)) {
            *wi = 0.0;
        }
    }
    let mut nu = 0.0;
    let mut lambda = 0.0;
    let mut bound_multipliers = vec![0.0; d];
    for (&c, &m) in working.iter().zip(mult) {
        match c {
            Constraint::Sum => nu = m,
            Constraint::Inner => lambda = m,
            Constraint::Bound(i) => bound_multipliers[i] = m,
        }
    }
    let kkt = kkt_report(prog, &w, nu, lambda, &bound_multipliers);
    QpSolution { w, nu, lambda, bound_multipliers, swaps, kkt }
}

fn kkt_report(prog: &Program<'_>, w: &[f64], nu: f64, lambda: f64, mu: &[f64]) -> KktReport {
    let stationarity = (0..prog.d())
        .map(|i| (w[i] - nu - lambda * prog.q[i] - mu[i]).abs())
        .fold(0.0, f64::max);
    let inner_slack = prog.eval(Constraint::Inner, w) - prog.tau;
    let complementarity = (0..prog.d())
        .map(|i| (mu[i] * w[i]).abs())
        .fold((lambda * inner_slack).abs(), f64::max);
    let primal_infeasibility = w
        .iter()
        .map(|&v| (-v).max(0.0))
        .fold((w.iter().sum::<f64>() - prog.alpha).abs().max(-inner_slack), f64::max);
    let dual_infeasibility = mu.iter().map(|&m| (-m).max(0.0)).fold((-lambda).max(0.0), f64::max);
    KktReport { stationarity, complementarity, primal_infeasibility, dual_infeasibility }
}
