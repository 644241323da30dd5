//! The two interpolating estimators: basis pursuit (minimum ℓ1 norm subject to
//! `Xw = y`) and the minimum-ℓ2-norm interpolator, plus the prediction-error
//! metric `‖ŵ − w*‖₂²`.

use crate::error::{Error, Result};
use crate::optim::dense::{dot, norm1, norm2_sq, norm_inf, Lu};
use crate::optim::{solve_spd_with_ridge, solve_standard_form, ColumnSource, LpOptions, LpStatus, Matrix};

/// Entries with `|w_i|` above this count toward the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolverStatus {
    Optimal,
    /// Min-ℓ2 solve needed the ridge retry.
    Ridged,
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl SolverStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverStatus::Optimal => "Optimal",
            SolverStatus::Ridged => "Ridged",
            SolverStatus::Infeasible => "Infeasible",
            SolverStatus::Unbounded => "Unbounded",
            SolverStatus::IterationLimit => "IterationLimit",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "Optimal" => SolverStatus::Optimal,
            "Ridged" => SolverStatus::Ridged,
            "Infeasible" => SolverStatus::Infeasible,
            "Unbounded" => SolverStatus::Unbounded,
            "IterationLimit" => SolverStatus::IterationLimit,
            _ => return None,
        })
    }
}

impl From<LpStatus> for SolverStatus {
    fn from(s: LpStatus) -> Self {
        match s {
            LpStatus::Optimal => SolverStatus::Optimal,
            LpStatus::Infeasible => SolverStatus::Infeasible,
            LpStatus::Unbounded => SolverStatus::Unbounded,
            LpStatus::IterationLimit => SolverStatus::IterationLimit,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InterpolatorResult {
    pub w_hat: Vec<f64>,
    pub l1_norm: f64,
    pub l2_norm: f64,
    /// `‖X ŵ − y‖∞`.
    pub interpolation_residual: f64,
    pub solver_status: SolverStatus,
    pub support_size: usize,
    /// Simplex multipliers for basis pursuit; `None` for min-ℓ2.
    pub dual: Option<Vec<f64>>,
    pub iterations: usize,
}

impl InterpolatorResult {
    fn new(x: &Matrix, y: &[f64], w_hat: Vec<f64>, status: SolverStatus) -> Self {
        let fitted = x.mul_vec(&w_hat);
        let interpolation_residual = fitted.iter().zip(y).fold(0.0_f64, |m, (f, t)| m.max((f - t).abs()));
        Self {
            l1_norm: norm1(&w_hat),
            l2_norm: norm2_sq(&w_hat).sqrt(),
            interpolation_residual,
            solver_status: status,
            support_size: w_hat.iter().filter(|v| v.abs() > SUPPORT_THRESHOLD).count(),
            w_hat,
            dual: None,
            iterations: 0,
        }
    }
}

/// Column view of `[X, −X]` without materializing the negated copy.
pub struct SignedPair<'a> {
    x: &'a Matrix,
}

impl<'a> SignedPair<'a> {
    pub fn new(x: &'a Matrix) -> Self {
        Self { x }
    }
}

impl ColumnSource for SignedPair<'_> {
    fn nrows(&self) -> usize {
        self.x.nrows()
    }

    fn ncols(&self) -> usize {
        2 * self.x.ncols()
    }

    fn column_into(&self, j: usize, out: &mut [f64]) {
        let d = self.x.ncols();
        let (col, sign) = if j < d { (j, 1.0) } else { (j - d, -1.0) };
        for (i, o) in out.iter_mut().enumerate() {
            *o = sign * self.x[(i, col)];
        }
    }

    fn price_into(&self, y: &[f64], out: &mut [f64]) {
        let d = self.x.ncols();
        let (pos, neg) = out.split_at_mut(d);
        self.x.tr_mul_into(y, pos);
        for (n, p) in neg.iter_mut().zip(pos.iter()) {
            *n = -p;
        }
    }
}

fn check_inputs(x: &Matrix, y: &[f64]) -> Result<()> {
    if y.len() != x.nrows() {
        return Err(Error::LengthMismatch { expected: x.nrows(), got: y.len() });
    }
    if x.nrows() > x.ncols() {
        return Err(Error::InvalidConfig(format!(
            "interpolation needs n ≤ d, got n={}, d={}",
            x.nrows(),
            x.ncols()
        )));
    }
    if !x.is_finite() || !y.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidConfig("non-finite regression data".into()));
    }
    Ok(())
}

/// Starting basis from the first `n` columns: `u_j` or `v_j` by the sign of
/// the square solve, so the start is primal feasible and phase 1 is skipped.
fn crash_basis(x: &Matrix, y: &[f64]) -> Option<Vec<usize>> {
    let (n, d) = (x.nrows(), x.ncols());
    let mut sq = Matrix::zeros(n, n);
    for i in 0..n {
        sq.row_mut(i).copy_from_slice(&x.row(i)[..n]);
    }
    let z = Lu::factorize(&sq, 1e-11).ok()?.solve(y);
    Some(z.iter().enumerate().map(|(j, &v)| if v >= 0.0 { j } else { d + j }).collect())
}

/// Basis pursuit via the LP `min 1ᵀ(u+v)` s.t. `[X, −X](u; v) = y`, `u, v ≥ 0`.
pub fn basis_pursuit(x: &Matrix, y: &[f64]) -> Result<InterpolatorResult> {
    basis_pursuit_with(x, y, &LpOptions::default())
}

pub fn basis_pursuit_with(x: &Matrix, y: &[f64], options: &LpOptions) -> Result<InterpolatorResult> {
    check_inputs(x, y)?;
    let d = x.ncols();
    let mut opts = options.clone();
    if opts.initial_basis.is_none() {
        opts.initial_basis = crash_basis(x, y);
    }
    let a = SignedPair::new(x);
    let cost = vec![1.0; 2 * d];
    let sol = solve_standard_form(&a, y, &cost, &opts)?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Lp(sol.status));
    }
    let w_hat: Vec<f64> = (0..d).map(|j| sol.z[j] - sol.z[d + j]).collect();
    let mut res = InterpolatorResult::new(x, y, w_hat, SolverStatus::Optimal);
    res.dual = Some(sol.duals);
    res.iterations = sol.iterations;
    Ok(res)
}

/// LP-duality certificate for a basis-pursuit solution: `u` with
/// `‖Xᵀu‖∞ ≤ 1` and `⟨y, u⟩ = ‖ŵ‖₁` proves optimality.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualCertificate {
    /// `‖Xᵀu‖∞`.
    pub max_correlation: f64,
    /// `⟨y, u⟩`.
    pub dual_objective: f64,
}

impl DualCertificate {
    pub fn holds(&self, l1_norm: f64) -> bool {
        self.max_correlation <= 1.0 + 1e-7
            && (self.dual_objective - l1_norm).abs() <= 1e-6 * (1.0 + l1_norm)
    }
}

pub fn dual_certificate(x: &Matrix, y: &[f64], result: &InterpolatorResult) -> Option<DualCertificate> {
    let u = result.dual.as_ref()?;
    Some(DualCertificate {
        max_correlation: norm_inf(&x.tr_mul_vec(u)),
        dual_objective: dot(y, u),
    })
}

/// `ŵ = Xᵀ(XXᵀ)⁻¹y`, with one ridge retry if the Gram matrix is numerically
/// not positive definite.
pub fn min_l2_interpolator(x: &Matrix, y: &[f64]) -> Result<InterpolatorResult> {
    check_inputs(x, y)?;
    let gram = x.gram_rows();
    let (u, ridged) = solve_spd_with_ridge(&gram, y)?;
    let w_hat = x.tr_mul_vec(&u);
    let status = if ridged { SolverStatus::Ridged } else { SolverStatus::Optimal };
    Ok(InterpolatorResult::new(x, y, w_hat, status))
}

/// `‖ŵ − w*‖₂²`.
pub fn prediction_error(w_hat: &[f64], w_star: &[f64]) -> Result<f64> {
    if w_hat.len() != w_star.len() {
        return Err(Error::LengthMismatch { expected: w_star.len(), got: w_hat.len() });
    }
    Ok(w_hat.iter().zip(w_star).map(|(a, b)| (a - b) * (a - b)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{gen_instance, FeatureDistribution, InstanceConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Matrix {
        Matrix::from_row_major(n, d, (0..n * d).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
    }

    #[test]
    fn bp_single_equation() {
        let x = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let r = basis_pursuit(&x, &[3.0]).unwrap();
        assert_eq!(r.w_hat, vec![3.0, 0.0]);
        assert_eq!(r.l1_norm, 3.0);
        assert_eq!(r.support_size, 1);
    }

    #[test]
    fn bp_matches_support_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..30 {
            let x = gaussian(&mut rng, 2, 4);
            let y: Vec<f64> = (0..2).map(|_| rng.sample(StandardNormal)).collect();
            let mut best = f64::INFINITY;
            for i in 0..4 {
                for j in i + 1..4 {
                    let (a, b, c, e) = (x[(0, i)], x[(0, j)], x[(1, i)], x[(1, j)]);
                    let det = a * e - b * c;
                    if det.abs() < 1e-12 {
                        continue;
                    }
                    let zi = (y[0] * e - b * y[1]) / det;
                    let zj = (a * y[1] - c * y[0]) / det;
                    best = best.min(zi.abs() + zj.abs());
                }
            }
            let r = basis_pursuit(&x, &y).unwrap();
            assert!((r.l1_norm - best).abs() <= 1e-9 * (1.0 + best));
            assert!(r.support_size <= 2);
            let cert = dual_certificate(&x, &y, &r).unwrap();
            assert!(cert.holds(r.l1_norm), "{cert:?}");
        }
    }

    #[test]
    fn bp_noiseless_recovery() {
        let mut ok = 0;
        for seed in 0..3 {
            let cfg = InstanceConfig::new(50, 1000, 0.0, FeatureDistribution::Normal, seed, 0);
            let inst = gen_instance(&cfg).unwrap();
            let r = basis_pursuit(&inst.x, &inst.y).unwrap();
            assert!(r.interpolation_residual <= 1e-7 * (1.0 + norm_inf(&inst.y)));
            assert!(r.support_size <= 50);
            if prediction_error(&r.w_hat, &inst.w_star).unwrap() <= 1e-16 {
                ok += 1;
            }
        }
        assert!(ok >= 2);
    }

    #[test]
    fn bp_rejects_bad_shapes() {
        let x = Matrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(basis_pursuit(&x, &[1.0, 2.0]).is_err());
        let x = Matrix::from_rows(&[vec![1.0, 2.0]]).unwrap();
        assert!(matches!(basis_pursuit(&x, &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn min_l2_examples() {
        let x = Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let r = min_l2_interpolator(&x, &[2.0]).unwrap();
        assert!((r.w_hat[0] - 1.0).abs() < 1e-15 && (r.w_hat[1] - 1.0).abs() < 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let x = Matrix::from_rows(&[vec![s, s, 0.0], vec![0.0, 0.0, 1.0]]).unwrap();
        let y = [3.0, -1.0];
        let r = min_l2_interpolator(&x, &y).unwrap();
        let expect = x.tr_mul_vec(&y);
        for (a, b) in r.w_hat.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn min_l2_is_minimal_over_null_perturbations() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gaussian(&mut rng, 3, 6);
        let y: Vec<f64> = (0..3).map(|_| rng.sample(StandardNormal)).collect();
        let r = min_l2_interpolator(&x, &y).unwrap();
        let gram = x.gram_rows();
        for _ in 0..100 {
            // Null direction: v minus its row-space projection.
            let v: Vec<f64> = (0..6).map(|_| rng.sample(StandardNormal)).collect();
            let (coef, _) = solve_spd_with_ridge(&gram, &x.mul_vec(&v)).unwrap();
            let proj = x.tr_mul_vec(&coef);
            let z: Vec<f64> = v.iter().zip(&proj).map(|(a, b)| a - b).collect();
            assert!(norm_inf(&x.mul_vec(&z)) < 1e-10);
            assert!(dot(&r.w_hat, &z).abs() < 1e-10);
            let t = rng.random_range(-2.0..2.0);
            let w: Vec<f64> = r.w_hat.iter().zip(&z).map(|(a, b)| a + t * b).collect();
            assert!(r.l2_norm <= norm2_sq(&w).sqrt() + 1e-12);
        }
    }

    #[test]
    fn prediction_error_examples() {
        assert_eq!(prediction_error(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(prediction_error(&[2.0, 0.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert!((prediction_error(&[0.6, 0.2], &[1.0, 0.0]).unwrap() - 0.2).abs() < 1e-15);
        assert!(matches!(prediction_error(&[1.0], &[1.0, 0.0]), Err(Error::LengthMismatch { .. })));
    }
}
