use crate::error::{Error, Result};
use crate::optim::dense::{Cholesky, Matrix};

/// Solves `M u = v` for symmetric positive definite `M` via Cholesky.
pub fn solve_spd(m: &Matrix, v: &[f64]) -> Result<Vec<f64>> {
    check_shape(m, v)?;
    Ok(Cholesky::factorize(m)?.solve(v))
}

/// Like [`solve_spd`], but retries once with a ridge of `1e-10 · trace(M)/p`
/// on the diagonal when the factorization fails. Returns the solution and
/// whether the ridge was applied.
pub fn solve_spd_with_ridge(m: &Matrix, v: &[f64]) -> Result<(Vec<f64>, bool)> {
    match solve_spd(m, v) {
        Ok(u) => Ok((u, false)),
        Err(Error::NotPositiveDefinite { .. }) => {
            let p = m.nrows();
            let trace: f64 = (0..p).map(|i| m[(i, i)]).sum();
            let ridge = 1e-10 * trace / p as f64;
            let mut regularized = m.clone();
            for i in 0..p {
                regularized[(i, i)] += ridge;
            }
            Ok((solve_spd(&regularized, v)?, true))
        }
        Err(e) => Err(e),
    }
}

fn check_shape(m: &Matrix, v: &[f64]) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidConfig(format!(
            "SPD solve needs a square matrix, got {}×{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if v.len() != m.nrows() {
        return Err(Error::LengthMismatch { expected: m.nrows(), got: v.len() });
    }
    Ok(())
}
