use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::subproblem::{ScreenOutcome, Subproblem};
use super::{elapsed_ms, finish, lipschitz_estimate, IterationEvent, SolveResult, SolverConfig, STEP_INFLATION};
use crate::dataset::DesignMatrix;
use crate::error::{OwlError, Result};
use crate::linalg::{axpy, dot};
use crate::screening::ScreeningTrace;
use crate::sorted_l1::{prox_owl_into, WeightVector};

/// Default step for the mini-batch solver on the given (restricted) matrix:
/// `1 / (1.01 · max(L̂, (n/l) · max_i ‖a_i‖²))`. The second term is the
/// curvature of a single scaled sample, which dominates when rows are nearly
/// orthogonal (`d ≫ n`).
pub fn default_eta(m: &DesignMatrix, batch_size: usize) -> Result<f64> {
    Ok(eta_from(m, lipschitz_estimate(m)?, batch_size))
}

fn eta_from(m: &DesignMatrix, lipschitz: f64, batch_size: usize) -> f64 {
    let rows = m.to_row_major();
    let d = m.d();
    let max_row = (0..m.n())
        .map(|i| rows[i * d..(i + 1) * d].iter().map(|v| v * v).sum::<f64>())
        .fold(0.0_f64, f64::max);
    let scaled = m.n() as f64 / batch_size as f64 * max_row;
    1.0 / (STEP_INFLATION * lipschitz.max(scaled))
}

/// Proximal SVRG on the active subproblem. Screening happens only in the
/// outer loop, where the exact gradient (and hence the certificate) is known.
pub(super) fn run(
    m: &DesignMatrix,
    w: &WeightVector,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&IterationEvent<'_>),
) -> Result<SolveResult> {
    let start = Instant::now();
    let n = m.n();
    let batch = cfg.spgd.batch_size;
    let batch_scale = n as f64 / batch as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut sub = Subproblem::new(m, w, cfg.warm_start_beta.as_deref());
    let mut trace = ScreeningTrace::new(m.d());
    let eta_for = |sub: &mut Subproblem<'_>| -> Result<f64> {
        match cfg.spgd.eta {
            Some(eta) => Ok(eta),
            None => {
                let l = sub.lipschitz()?;
                Ok(eta_from(&sub.matrix, l, batch))
            }
        }
    };
    let mut eta = eta_for(&mut sub)?;
    let mut rows = sub.matrix.to_row_major();

    let max_outer = cfg.effective_max_outer();
    for k in 1..=max_outer {
        let (cert, corr) = sub.certificate()?;
        if !cert.gap.is_finite() {
            return Err(divergence(cfg));
        }
        observer(&IterationEvent {
            iter: k,
            active: &sub.active,
            beta_active: &sub.beta,
            certificate: &cert,
        });
        if let Some(full) = sub.converged(&cert, cfg.epsilon)? {
            trace.push(k, full.gap, sub.active.len(), elapsed_ms(start));
            return Ok(finish(sub.full_beta(), full, k, trace, start, true, sub.active));
        }

        // full gradient ṽ = X_Aᵀ(X_A β − y) at the snapshot
        let mut full_grad = corr;
        if cfg.screening {
            match sub.screen(&cert, &full_grad)? {
                ScreenOutcome::Unchanged => {}
                ScreenOutcome::Shrunk => {
                    eta = eta_for(&mut sub)?;
                    rows = sub.matrix.to_row_major();
                    let rho: Vec<f64> = sub.xbeta.iter().zip(m.y()).map(|(p, y)| p - y).collect();
                    full_grad = sub.matrix.tmatvec(&rho);
                }
                ScreenOutcome::Emptied => {
                    trace.push(k, cert.gap, 0, elapsed_ms(start));
                    let full = sub.full_certificate()?;
                    let converged = full.gap <= cfg.epsilon;
                    return Ok(finish(sub.full_beta(), full, k, trace, start, converged, sub.active));
                }
            }
        }
        trace.push(k, cert.gap, sub.active.len(), elapsed_ms(start));

        let d_a = sub.beta.len();
        let snapshot = sub.beta.clone();
        let mut x = snapshot.clone();
        let mut diff = vec![0.0; d_a];
        let mut direction = vec![0.0; d_a];
        let mut point = vec![0.0; d_a];
        for _ in 0..cfg.spgd.inner_steps {
            for j in 0..d_a {
                diff[j] = x[j] - snapshot[j];
            }
            direction.copy_from_slice(&full_grad);
            // (n/l) Σ_{i∈I} a_i a_iᵀ (x − β̃): the y terms cancel
            for i in rand::seq::index::sample(&mut rng, n, batch) {
                let row = &rows[i * d_a..(i + 1) * d_a];
                let r = dot(row, &diff);
                if r != 0.0 {
                    axpy(batch_scale * r, row, &mut direction);
                }
            }
            for j in 0..d_a {
                point[j] = x[j] - eta * direction[j];
            }
            prox_owl_into(&point, sub.weights.as_slice(), eta, &mut x);
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(divergence(cfg));
        }
        sub.xbeta = sub.matrix.matvec(&x);
        sub.beta = x;
    }

    let full = sub.full_certificate()?;
    let converged = full.gap <= cfg.epsilon;
    Ok(finish(sub.full_beta(), full, max_outer, trace, start, converged, sub.active))
}

fn divergence(cfg: &SolverConfig) -> OwlError {
    let hint = match cfg.spgd.eta {
        Some(eta) => format!("non-finite iterate with eta = {eta}; try reducing eta"),
        None => "non-finite iterate; try a smaller explicit eta".to_string(),
    };
    OwlError::Divergence(hint)
}
