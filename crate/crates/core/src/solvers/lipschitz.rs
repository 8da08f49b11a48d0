use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::DesignMatrix;
use crate::error::{OwlError, Result};
use crate::linalg::{dot, norm2};

const MAX_ITERS: usize = 100;
const REL_TOL: f64 = 1e-6;
/// Inflation applied to the estimate before it is used as a step size.
pub const STEP_INFLATION: f64 = 1.01;

/// Largest eigenvalue of `XᵀX` (the Lipschitz constant of the least-squares
/// gradient) by power iteration with a Rayleigh-quotient estimate.
pub fn lipschitz_estimate(m: &DesignMatrix) -> Result<f64> {
    power_iteration(m, None).map(|(l, _)| l)
}

/// Power iteration from `start` (or a fixed pseudo-random vector), returning
/// the estimate and the last iterate. Solvers pass the previous top
/// eigenvector restricted to the surviving columns, which usually converges
/// in a handful of products.
pub(crate) fn power_iteration(m: &DesignMatrix, start: Option<&[f64]>) -> Result<(f64, Vec<f64>)> {
    if m.n() == 0 || m.d() == 0 {
        return Err(OwlError::Empty("design matrix has no entries".into()));
    }
    let mut v = match start {
        Some(s) if s.len() == m.d() && norm2(s) > 0.0 => s.to_vec(),
        _ => {
            // fixed pseudo-random start: never orthogonal to the top eigenvector in practice
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            (0..m.d()).map(|_| rng.random_range(0.5..1.5)).collect()
        }
    };
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut estimate = 0.0;
    for _ in 0..MAX_ITERS {
        let xv = m.matvec(&v);
        let w = m.tmatvec(&xv);
        let rayleigh = dot(&v, &w);
        let nw = norm2(&w);
        if nw == 0.0 {
            estimate = 0.0;
            break;
        }
        v = w.into_iter().map(|x| x / nw).collect();
        let converged = (rayleigh - estimate).abs() <= REL_TOL * rayleigh;
        estimate = rayleigh;
        if converged {
            break;
        }
    }
    if estimate <= 0.0 {
        return Err(OwlError::Degenerate(
            "design matrix is all zeros: nothing to solve".into(),
        ));
    }
    Ok((estimate, v))
}

/// Gradient step `1 / (1.01 · L̂)`.
pub fn step_size(m: &DesignMatrix) -> Result<f64> {
    Ok(1.0 / (STEP_INFLATION * lipschitz_estimate(m)?))
}
