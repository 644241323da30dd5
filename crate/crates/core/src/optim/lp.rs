//! Dense revised simplex for standard-form linear programs
//! `min cᵀz  s.t.  A z = b, z ≥ 0`.
//!
//! The basis inverse is kept explicitly and updated with a rank-one pivot per
//! iteration, then rebuilt from an LU factorization every
//! [`LpOptions::refactor_interval`] pivots. Pricing uses Dantzig's rule and
//! falls back to Bland's rule after a long run of degenerate pivots.

use crate::error::{Error, Result};
use crate::optim::dense::{axpy, dot, norm_inf, Lu, Matrix};

/// Column access used by the simplex. Implemented by [`Matrix`] and by
/// structured views that never materialize their columns.
pub trait ColumnSource {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    /// Writes column `j` into `out` (length `nrows`).
    fn column_into(&self, j: usize, out: &mut [f64]);
    /// Writes `out[j] = yᵀ A_j` for every column.
    fn price_into(&self, y: &[f64], out: &mut [f64]);
}

impl ColumnSource for Matrix {
    fn nrows(&self) -> usize {
        Matrix::nrows(self)
    }

    fn ncols(&self) -> usize {
        Matrix::ncols(self)
    }

    fn column_into(&self, j: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self[(i, j)];
        }
    }

    fn price_into(&self, y: &[f64], out: &mut [f64]) {
        self.tr_mul_into(y, out);
    }
}

#[derive(Clone, Debug)]
pub struct LpProblem {
    pub a: Matrix,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl LpStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LpStatus::Optimal => "Optimal",
            LpStatus::Infeasible => "Infeasible",
            LpStatus::Unbounded => "Unbounded",
            LpStatus::IterationLimit => "IterationLimit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub pivot_tol: f64,
    /// Defaults to `50 · (m + k)` when `None`.
    pub max_iterations: Option<usize>,
    pub refactor_interval: usize,
    /// Consecutive degenerate Dantzig pivots tolerated before switching to Bland's rule.
    pub bland_after: usize,
    /// Optional starting basis of `m` column indices. Ignored when singular
    /// or primal infeasible.
    pub initial_basis: Option<Vec<usize>>,
}

impl Default for LpOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-8,
            dual_tol: 1e-9,
            pivot_tol: 1e-11,
            max_iterations: None,
            refactor_interval: 100,
            bland_after: 1000,
            initial_basis: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub z: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    /// Basic column per row. Indices `≥ k` denote artificial columns left on
    /// redundant rows.
    pub basis: Vec<usize>,
    /// Simplex multipliers `y = c_Bᵀ B⁻¹`.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

/// Solves a dense standard-form problem.
pub fn solve_lp(problem: &LpProblem, options: &LpOptions) -> Result<LpSolution> {
    solve_standard_form(&problem.a, &problem.b, &problem.c, options)
}

/// Solves `min cᵀz s.t. A z = b, z ≥ 0` for any column source `A`.
pub fn solve_standard_form<A: ColumnSource>(
    a: &A,
    b: &[f64],
    c: &[f64],
    options: &LpOptions,
) -> Result<LpSolution> {
    let (m, k) = (a.nrows(), a.ncols());
    if b.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: b.len() });
    }
    if c.len() != k {
        return Err(Error::LengthMismatch { expected: k, got: c.len() });
    }
    if m > k {
        return Err(Error::InvalidConfig(format!(
            "standard form needs m ≤ k, got m={m}, k={k}"
        )));
    }
    if !b.iter().chain(c).all(|v| v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite LP data".into()));
    }
    let mut simplex = Simplex::new(a, b, c, options);
    Ok(simplex.run())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Rule {
    Dantzig,
    Bland,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Simplex<'a, A: ColumnSource> {
    a: &'a A,
    b: &'a [f64],
    c: &'a [f64],
    opts: &'a LpOptions,
    m: usize,
    k: usize,
    art_sign: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<bool>,
    /// Artificials that left the basis are never allowed back.
    retired: Vec<bool>,
    binv: Matrix,
    xb: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
    since_refactor: usize,
    degenerate_streak: usize,
    rule: Rule,
    // scratch
    col: Vec<f64>,
    dcol: Vec<f64>,
    y: Vec<f64>,
    prices: Vec<f64>,
}

impl<'a, A: ColumnSource> Simplex<'a, A> {
    fn new(a: &'a A, b: &'a [f64], c: &'a [f64], opts: &'a LpOptions) -> Self {
        let (m, k) = (a.nrows(), a.ncols());
        let art_sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        Self {
            a,
            b,
            c,
            opts,
            m,
            k,
            art_sign,
            basis: Vec::new(),
            in_basis: vec![false; k + m],
            retired: vec![false; m],
            binv: Matrix::zeros(m, m),
            xb: vec![0.0; m],
            iterations: 0,
            max_iterations: opts.max_iterations.unwrap_or(50 * (m + k)),
            since_refactor: 0,
            degenerate_streak: 0,
            rule: Rule::Dantzig,
            col: vec![0.0; m],
            dcol: vec![0.0; m],
            y: vec![0.0; m],
            prices: vec![0.0; k],
        }
    }

    fn b_scale(&self) -> f64 {
        1.0 + norm_inf(self.b)
    }

    fn column(&self, j: usize, out: &mut [f64]) {
        if j < self.k {
            self.a.column_into(j, out);
        } else {
            out.iter_mut().for_each(|v| *v = 0.0);
            let i = j - self.k;
            out[i] = self.art_sign[i];
        }
    }

    fn set_basis(&mut self, basis: Vec<usize>) {
        self.in_basis.iter_mut().for_each(|v| *v = false);
        for &j in &basis {
            self.in_basis[j] = true;
        }
        self.basis = basis;
    }

    fn start_artificial(&mut self) {
        let basis: Vec<usize> = (self.k..self.k + self.m).collect();
        self.set_basis(basis);
        self.retired.iter_mut().for_each(|v| *v = false);
        self.binv = Matrix::zeros(self.m, self.m);
        for i in 0..self.m {
            self.binv[(i, i)] = self.art_sign[i];
            self.xb[i] = self.b[i].abs();
        }
        self.since_refactor = 0;
    }

    /// Rebuilds `B⁻¹` and `x_B` from an LU factorization of the basis.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut bmat = Matrix::zeros(m, m);
        let mut col = vec![0.0; m];
        for (pos, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for i in 0..m {
                bmat[(i, pos)] = col[i];
            }
        }
        match Lu::factorize(&bmat, 1e-13) {
            Ok(lu) => {
                self.binv = lu.inverse();
                self.xb = self.binv.mul_vec(self.b);
                self.since_refactor = 0;
                true
            }
            Err(_) => false,
        }
    }

    fn try_crash_basis(&mut self, basis: &[usize]) -> bool {
        if basis.len() != self.m || basis.iter().any(|&j| j >= self.k) {
            return false;
        }
        let mut seen = vec![false; self.k];
        for &j in basis {
            if std::mem::replace(&mut seen[j], true) {
                return false;
            }
        }
        self.set_basis(basis.to_vec());
        if !self.refactor() {
            return false;
        }
        let tol = self.opts.primal_tol * self.b_scale();
        if self.xb.iter().any(|&v| v < -tol) {
            return false;
        }
        self.xb.iter_mut().for_each(|v| *v = v.max(0.0));
        for r in self.retired.iter_mut() {
            *r = true;
        }
        true
    }

    fn cost(&self, phase: Phase, j: usize) -> f64 {
        match phase {
            Phase::One => {
                if j >= self.k {
                    1.0
                } else {
                    0.0
                }
            }
            Phase::Two => {
                if j < self.k {
                    self.c[j]
                } else {
                    0.0
                }
            }
        }
    }

    fn compute_duals(&mut self, phase: Phase) {
        self.y.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..self.m {
            let cb = self.cost(phase, self.basis[i]);
            if cb != 0.0 {
                axpy(cb, self.binv.row(i), &mut self.y);
            }
        }
    }

    /// Returns the entering column, or `None` at optimality.
    fn price(&mut self, phase: Phase) -> Option<usize> {
        self.compute_duals(phase);
        self.a.price_into(&self.y, &mut self.prices);
        let tol = self.opts.dual_tol;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.k {
            if self.in_basis[j] {
                continue;
            }
            let rc = self.cost(phase, j) - self.prices[j];
            if rc < -tol {
                match self.rule {
                    Rule::Bland => return Some(j),
                    Rule::Dantzig => {
                        if best.is_none_or(|(_, b)| rc < b) {
                            best = Some((j, rc));
                        }
                    }
                }
            }
        }
        if phase == Phase::One {
            for i in 0..self.m {
                let j = self.k + i;
                if self.in_basis[j] || self.retired[i] {
                    continue;
                }
                let rc = 1.0 - self.y[i] * self.art_sign[i];
                if rc < -tol && best.is_none_or(|(_, b)| rc < b) {
                    best = Some((j, rc));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    fn ftran(&mut self, j: usize) {
        let mut col = std::mem::take(&mut self.col);
        self.column(j, &mut col);
        for i in 0..self.m {
            self.dcol[i] = dot(self.binv.row(i), &col);
        }
        self.col = col;
    }

    /// Leaving row and step length for the current `dcol`, or `None` when
    /// the ray is unbounded.
    fn ratio_test(&self, phase: Phase) -> Option<(usize, f64)> {
        let ptol = self.opts.pivot_tol;
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.m {
            let di = self.dcol[i];
            let stuck_artificial = phase == Phase::Two && self.basis[i] >= self.k;
            let ratio = if stuck_artificial && di.abs() > ptol {
                0.0
            } else if di > ptol {
                self.xb[i].max(0.0) / di
            } else {
                continue;
            };
            best = match best {
                None => Some((i, ratio)),
                Some((r, br)) => {
                    let tie = (ratio - br).abs() <= 1e-12 * (1.0 + br.abs());
                    let better = if tie {
                        match self.rule {
                            Rule::Dantzig => di.abs() > self.dcol[r].abs(),
                            Rule::Bland => self.basis[i] < self.basis[r],
                        }
                    } else {
                        ratio < br
                    };
                    if better {
                        Some((i, ratio))
                    } else {
                        Some((r, br))
                    }
                }
            };
        }
        best
    }

    fn pivot(&mut self, r: usize, entering: usize, theta: f64) {
        let m = self.m;
        let dr = self.dcol[r];
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * self.dcol[i];
            }
        }
        self.xb[r] = theta;

        let inv_dr = 1.0 / dr;
        self.binv.row_mut(r).iter_mut().for_each(|v| *v *= inv_dr);
        let pivot_row = self.binv.row(r).to_vec();
        for i in 0..m {
            let di = self.dcol[i];
            if i != r && di != 0.0 {
                axpy(-di, &pivot_row, self.binv.row_mut(i));
            }
        }

        let leaving = self.basis[r];
        self.in_basis[leaving] = false;
        if leaving >= self.k {
            self.retired[leaving - self.k] = true;
        }
        self.basis[r] = entering;
        self.in_basis[entering] = true;

        if theta.abs() <= self.opts.primal_tol {
            self.degenerate_streak += 1;
            if self.degenerate_streak >= self.opts.bland_after {
                self.rule = Rule::Bland;
            }
        } else {
            self.degenerate_streak = 0;
            self.rule = Rule::Dantzig;
        }

        self.iterations += 1;
        self.since_refactor += 1;
        if self.since_refactor >= self.opts.refactor_interval {
            self.refactor();
        }
    }

    fn run_phase(&mut self, phase: Phase) -> PhaseOutcome {
        loop {
            if self.iterations >= self.max_iterations {
                return PhaseOutcome::IterationLimit;
            }
            let Some(entering) = self.price(phase) else {
                // Confirm optimality on a fresh factorization.
                if self.since_refactor > 0 && self.refactor() && self.price(phase).is_some() {
                    continue;
                }
                return PhaseOutcome::Optimal;
            };
            self.ftran(entering);
            let Some((r, theta)) = self.ratio_test(phase) else {
                return PhaseOutcome::Unbounded;
            };
            self.pivot(r, entering, theta);
        }
    }

    fn drive_out_artificials(&mut self) {
        let mut row_prices = vec![0.0; self.k];
        for r in 0..self.m {
            if self.basis[r] < self.k {
                continue;
            }
            let binv_row = self.binv.row(r).to_vec();
            self.a.price_into(&binv_row, &mut row_prices);
            let best = (0..self.k)
                .filter(|&j| !self.in_basis[j])
                .map(|j| (j, row_prices[j].abs()))
                .fold(None, |acc: Option<(usize, f64)>, c| match acc {
                    Some(b) if b.1 >= c.1 => Some(b),
                    _ => Some(c),
                });
            if let Some((j, mag)) = best {
                if mag > 1e-9 {
                    self.ftran(j);
                    let theta = self.xb[r] / self.dcol[r];
                    self.pivot(r, j, theta);
                }
            }
        }
    }

    fn solution(&mut self, status: LpStatus, phase: Phase) -> LpSolution {
        let mut z = vec![0.0; self.k];
        for (i, &j) in self.basis.iter().enumerate() {
            if j < self.k {
                z[j] = self.xb[i].max(0.0);
            }
        }
        let objective = dot(self.c, &z);
        self.compute_duals(phase);
        LpSolution {
            z,
            objective,
            status,
            basis: self.basis.clone(),
            duals: self.y.clone(),
            iterations: self.iterations,
        }
    }

    fn run(&mut self) -> LpSolution {
        let crashed = match &self.opts.initial_basis {
            Some(basis) => {
                let basis = basis.clone();
                self.try_crash_basis(&basis)
            }
            None => false,
        };
        if !crashed {
            self.start_artificial();
            match self.run_phase(Phase::One) {
                PhaseOutcome::Optimal => {}
                PhaseOutcome::IterationLimit => {
                    return self.solution(LpStatus::IterationLimit, Phase::One)
                }
                // Phase one is bounded below by zero; treat as a numerical failure.
                PhaseOutcome::Unbounded => return self.solution(LpStatus::Infeasible, Phase::One),
            }
            let infeasibility: f64 = self
                .basis
                .iter()
                .zip(&self.xb)
                .filter(|(&j, _)| j >= self.k)
                .map(|(_, &v)| v.max(0.0))
                .sum();
            if infeasibility > self.opts.primal_tol * self.b_scale() {
                return self.solution(LpStatus::Infeasible, Phase::One);
            }
            self.drive_out_artificials();
        }
        self.rule = Rule::Dantzig;
        self.degenerate_streak = 0;
        let status = match self.run_phase(Phase::Two) {
            PhaseOutcome::Optimal => LpStatus::Optimal,
            PhaseOutcome::Unbounded => LpStatus::Unbounded,
            PhaseOutcome::IterationLimit => LpStatus::IterationLimit,
        };
        self.solution(status, Phase::Two)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(rows: &[Vec<f64>], b: &[f64], c: &[f64]) -> LpProblem {
        LpProblem {
            a: Matrix::from_rows(rows).unwrap(),
            b: b.to_vec(),
            c: c.to_vec(),
        }
    }

    #[test]
    fn symmetric_degenerate_optimum() {
        let sol = solve_lp(&lp(&[vec![1.0, 1.0]], &[2.0], &[1.0, 1.0]), &LpOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 2.0).abs() < 1e-12);
        let z = &sol.z;
        assert!((z[0] - 2.0).abs() < 1e-12 && z[1].abs() < 1e-12 || (z[1] - 2.0).abs() < 1e-12 && z[0].abs() < 1e-12);
    }

    #[test]
    fn forced_unique_point() {
        let sol = solve_lp(
            &lp(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 1.0], &[3.0, 5.0]),
            &LpOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 8.0).abs() < 1e-12);
        assert!((sol.z[0] - 1.0).abs() < 1e-12 && (sol.z[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        // z1 + z2 = -1 with z ≥ 0
        let sol = solve_lp(&lp(&[vec![1.0, 1.0]], &[-1.0], &[1.0, 1.0]), &LpOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        // z1 - z2 = 1, min -z1
        let sol = solve_lp(&lp(&[vec![1.0, -1.0]], &[1.0], &[-1.0, 0.0]), &LpOptions::default()).unwrap();
        assert_eq!(sol.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_row_keeps_artificial() {
        let sol = solve_lp(
            &lp(
                &[vec![1.0, 1.0, 0.0], vec![2.0, 2.0, 0.0]],
                &[1.0, 2.0],
                &[1.0, 2.0, 0.0],
            ),
            &LpOptions::default(),
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-10);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let opts = LpOptions { max_iterations: Some(0), ..LpOptions::default() };
        let sol = solve_lp(
            &lp(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[1.0, 1.0], &[3.0, 5.0]),
            &opts,
        )
        .unwrap();
        assert_eq!(sol.status, LpStatus::IterationLimit);
    }

    #[test]
    fn rejects_bad_shapes() {
        let p = lp(&[vec![1.0], vec![1.0]], &[1.0, 1.0], &[1.0]);
        assert!(matches!(solve_lp(&p, &LpOptions::default()), Err(Error::InvalidConfig(_))));
    }
}
