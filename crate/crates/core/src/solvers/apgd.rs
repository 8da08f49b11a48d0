use std::time::Instant;

use super::subproblem::{ScreenOutcome, Subproblem};
use super::{elapsed_ms, finish, IterationEvent, SolveResult, SolverConfig, STEP_INFLATION};
use crate::dataset::DesignMatrix;
use crate::error::{OwlError, Result};
use crate::screening::ScreeningTrace;
use crate::sorted_l1::{prox_owl_into, WeightVector};

/// FISTA on the active subproblem. On every active-set change the momentum
/// restarts (`t = 1`, `b = β`) and the step is recomputed for the smaller
/// matrix.
pub(super) fn run(
    m: &DesignMatrix,
    w: &WeightVector,
    cfg: &SolverConfig,
    mut observer: impl FnMut(&IterationEvent<'_>),
) -> Result<SolveResult> {
    let start = Instant::now();
    let mut sub = Subproblem::new(m, w, cfg.warm_start_beta.as_deref());
    let mut trace = ScreeningTrace::new(m.d());
    let mut step = 1.0 / (STEP_INFLATION * sub.lipschitz()?);

    // extrapolation point b and X_A b
    let mut b = sub.beta.clone();
    let mut xb = sub.xbeta.clone();
    let mut t = 1.0_f64;
    let mut resid = vec![0.0; m.n()];
    let mut point = vec![0.0; sub.beta.len()];
    let mut next = vec![0.0; sub.beta.len()];

    let max_outer = cfg.effective_max_outer();
    for k in 1..=max_outer {
        let (cert, corr) = sub.certificate()?;
        if !cert.gap.is_finite() {
            return Err(OwlError::Divergence("non-finite duality gap (step too large)".into()));
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

        if cfg.screening {
            match sub.screen(&cert, &corr)? {
                ScreenOutcome::Unchanged => {}
                ScreenOutcome::Shrunk => {
                    t = 1.0;
                    b.clone_from(&sub.beta);
                    xb.clone_from(&sub.xbeta);
                    step = 1.0 / (STEP_INFLATION * sub.lipschitz()?);
                    point.resize(sub.beta.len(), 0.0);
                    next.resize(sub.beta.len(), 0.0);
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

        // β⁺ = prox_{step·λ}(b − step·X_Aᵀ(X_A b − y))
        for ((r, p), y) in resid.iter_mut().zip(&xb).zip(m.y()) {
            *r = p - y;
        }
        for (j, pt) in point.iter_mut().enumerate() {
            let g = crate::linalg::dot(sub.matrix.col(j), &resid);
            *pt = b[j] - step * g;
        }
        prox_owl_into(&point, sub.weights.as_slice(), step, &mut next);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(OwlError::Divergence("non-finite iterate (step too large)".into()));
        }

        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let momentum = (t - 1.0) / t_next;
        let xnext = sub.matrix.matvec(&next);
        for j in 0..b.len() {
            b[j] = next[j] + momentum * (next[j] - sub.beta[j]);
        }
        for i in 0..xb.len() {
            xb[i] = xnext[i] + momentum * (xnext[i] - sub.xbeta[i]);
        }
        sub.beta.copy_from_slice(&next);
        sub.xbeta = xnext;
        t = t_next;
    }

    // iteration cap reached: report the full-problem certificate
    let full = sub.full_certificate()?;
    let converged = full.gap <= cfg.epsilon;
    Ok(finish(sub.full_beta(), full, max_outer, trace, start, converged, sub.active))
}
