//! Brute-force solver for the original `d`-dimensional auxiliary programs,
//! used to check the scalar reformulations at small `d`.
//!
//! Without loss of generality `w ≥ 0` and `H` is sorted descending. Writing
//! `w = b·u` with `u` on the simplex, `p = ⟨u, H⟩` and `q = ‖u‖₂²`, the scale
//! `b = ‖w‖₁` can be eliminated in closed form (`k± = (1 ± ρ)n`):
//!
//! ```text
//! N:      min b  s.t. b²p² ≥ k₊(σ² + b²q)           → sqrt(k₊σ²/(p² − k₊q))
//! Plus:   max b²q s.t. b ≤ B, b²p² ≥ k₋(σ² + b²q)   → B²q  if B²(p² − k₋q) ≥ k₋σ²
//! Minus:  min b²q s.t. b ≤ B, b²p² ≥ k₋(σ² + b²q)   → k₋σ²q/(p² − k₋q), same condition
//! ```
//!
//! The remaining search over the simplex is a lattice scan with doubling
//! resolution, then pair-move polishing from the best lattice points.

use super::AuxParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Program {
    N,
    Plus,
    Minus,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    /// `None` when no feasible point was found.
    pub value: Option<f64>,
    /// Best direction on the simplex.
    pub direction: Vec<f64>,
    pub evaluations: usize,
    /// Lattice resolution at which successive refinements agreed.
    pub resolution: usize,
}

const AGREEMENT: f64 = 5e-4;
const MAX_EVALUATIONS: usize = 10_000_000;
const KEEP: usize = 6;

struct Problem<'a> {
    h: &'a [f64],
    program: Program,
    k: f64,
    sigma2: f64,
    b2: f64,
}

impl Problem<'_> {
    fn pq(&self, u: &[f64]) -> (f64, f64) {
        let p = u.iter().zip(self.h).map(|(a, b)| a * b).sum();
        let q = u.iter().map(|a| a * a).sum();
        (p, q)
    }

    /// Constraint slack; feasible when `≥ 0`. Always feasible for `N` with positive margin.
    fn slack(&self, u: &[f64]) -> f64 {
        let (p, q) = self.pq(u);
        match self.program {
            Program::N => p * p - self.k * q,
            Program::Plus | Program::Minus => self.b2 * (p * p - self.k * q) - self.k * self.sigma2,
        }
    }

    /// Value to minimize; `+∞` when infeasible.
    fn cost(&self, u: &[f64]) -> f64 {
        let (p, q) = self.pq(u);
        let margin = p * p - self.k * q;
        match self.program {
            Program::N => {
                if margin > 0.0 { self.k * self.sigma2 / margin } else { f64::INFINITY }
            }
            Program::Plus => {
                if self.b2 * margin >= self.k * self.sigma2 && margin > 0.0 { -self.b2 * q } else { f64::INFINITY }
            }
            Program::Minus => {
                if self.b2 * margin >= self.k * self.sigma2 && margin > 0.0 {
                    self.k * self.sigma2 * q / margin
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn report(&self, cost: f64) -> Option<f64> {
        if !cost.is_finite() {
            return None;
        }
        Some(match self.program {
            Program::N => cost.sqrt(),
            Program::Plus => -cost,
            Program::Minus => cost,
        })
    }

    /// Gradient of the slack, for restoration moves.
    fn slack_grad(&self, u: &[f64]) -> Vec<f64> {
        let (p, _) = self.pq(u);
        let scale = match self.program {
            Program::N => 1.0,
            _ => self.b2,
        };
        u.iter().zip(self.h).map(|(&ui, &hi)| scale * (2.0 * p * hi - 2.0 * self.k * ui)).collect()
    }
}

/// Visits every composition of `total` into `parts` nonnegative integers.
fn for_each_composition(parts: usize, total: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, parts: usize, left: usize, f: &mut dyn FnMut(&[usize])) {
        if buf.len() + 1 == parts {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for v in 0..=left {
            buf.push(v);
            rec(buf, parts, left - v, f);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(parts);
    rec(&mut buf, parts, total, f);
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

struct Counter {
    evaluations: usize,
}

fn polish(prob: &Problem, start: &[f64], initial_step: f64, counter: &mut Counter) -> (Vec<f64>, f64) {
    let d = start.len();
    let mut u = start.to_vec();
    let mut best = prob.cost(&u);
    counter.evaluations += 1;
    let constrained = prob.program != Program::N;
    let mut step = initial_step;
    let mut trial = vec![0.0; d];
    while step > 1e-12 {
        let mut improved = false;
        for i in 0..d {
            for j in 0..d {
                if i == j || u[i] <= 0.0 {
                    continue;
                }
                let t = step.min(u[i]);
                trial.copy_from_slice(&u);
                trial[i] -= t;
                trial[j] += t;
                let mut c = prob.cost(&trial);
                counter.evaluations += 1;
                if constrained && c.is_infinite() {
                    if let Some(fixed) = restore(prob, &trial, counter) {
                        c = prob.cost(&fixed);
                        trial = fixed;
                    }
                }
                if c < best {
                    best = c;
                    u.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (u, best)
}

/// Pushes an infeasible point back onto the feasible set along the pair
/// move with the steepest slack gain, with the smallest sufficient magnitude.
fn restore(prob: &Problem, u: &[f64], counter: &mut Counter) -> Option<Vec<f64>> {
    let g = prob.slack_grad(u);
    let d = u.len();
    let mut pick = None;
    let mut gain = 0.0;
    for a in 0..d {
        if u[a] <= 0.0 {
            continue;
        }
        for b in 0..d {
            if a != b && g[b] - g[a] > gain {
                gain = g[b] - g[a];
                pick = Some((a, b));
            }
        }
    }
    let (a, b) = pick?;
    let moved = |t: f64| {
        let mut v = u.to_vec();
        v[a] -= t;
        v[b] += t;
        v
    };
    let is_ok = |v: &[f64]| prob.slack(v) >= 0.0 && prob.cost(v).is_finite();
    let mut hi = u[a];
    counter.evaluations += 1;
    if !is_ok(&moved(hi)) {
        return None;
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        counter.evaluations += 1;
        if is_ok(&moved(mid)) { hi = mid } else { lo = mid }
    }
    Some(moved(hi))
}

/// Brute-force optimum of program `N`, `Plus` or `Minus` for sorted `h ≥ 0`,
/// `d ≤ 8`.
pub fn phi_oracle_small_d(h: &[f64], program: Program, params: &AuxParams) -> OracleResult {
    let d = h.len();
    assert!((1..=8).contains(&d), "oracle is meant for d ≤ 8");
    let mut hs: Vec<f64> = h.iter().map(|v| v.abs()).collect();
    hs.sort_by(|a, b| b.total_cmp(a));
    let k = match program {
        Program::N => (1.0 + params.rho) * params.n as f64,
        _ => (1.0 - params.rho) * params.n as f64,
    };
    let prob = Problem { h: &hs, program, k, sigma2: params.sigma2, b2: params.b * params.b };
    let mut counter = Counter { evaluations: 0 };

    let mut previous: Option<f64> = None;
    let mut best: (Vec<f64>, f64) = (vec![0.0; d], f64::INFINITY);
    let mut resolution = 0;
    let mut total = 8;
    loop {
        if counter.evaluations as f64 + binomial(total + d - 1, d - 1) > MAX_EVALUATIONS as f64 {
            break;
        }
        resolution = total;
        let mut top: Vec<(f64, Vec<f64>)> = Vec::with_capacity(KEEP + 1);
        let inv = 1.0 / total as f64;
        for_each_composition(d, total, &mut |c| {
            let u: Vec<f64> = c.iter().map(|&v| v as f64 * inv).collect();
            let cost = prob.cost(&u);
            counter.evaluations += 1;
            if cost.is_finite() && (top.len() < KEEP || cost < top[top.len() - 1].0) {
                let pos = top.partition_point(|e| e.0 <= cost);
                top.insert(pos, (cost, u));
                top.truncate(KEEP);
            }
        });
        for (_, u) in &top {
            let cand = polish(&prob, u, inv, &mut counter);
            if cand.1 < best.1 {
                best = cand;
            }
        }
        let value = prob.report(best.1);
        match (previous, value) {
            (Some(a), Some(b)) if (a - b).abs() <= AGREEMENT * b.abs().max(f64::MIN_POSITIVE) => break,
            (Some(a), Some(b)) if a == b => break,
            _ => {}
        }
        if value.is_none() && total >= 64 {
            break;
        }
        previous = value;
        total *= 2;
    }
    OracleResult {
        value: prob.report(best.1),
        direction: best.0,
        evaluations: counter.evaluations,
        resolution,
    }
}
