use super::lipschitz::power_iteration;
use crate::dataset::DesignMatrix;
use crate::duality::{certificate_from_parts, gap_certificate, GapCertificate};
use crate::error::Result;
use crate::screening::{screen_iterative, ActiveSet};
use crate::sorted_l1::WeightVector;

pub(crate) enum ScreenOutcome {
    Unchanged,
    Shrunk,
    /// Every feature was screened: the optimum is zero.
    Emptied,
}

/// The problem restricted to the current active set, with the restricted
/// coefficients and the cached product `X_A β_A`.
pub(crate) struct Subproblem<'a> {
    full: &'a DesignMatrix,
    full_weights: &'a WeightVector,
    pub active: ActiveSet,
    pub matrix: DesignMatrix,
    pub weights: WeightVector,
    pub beta: Vec<f64>,
    pub xbeta: Vec<f64>,
    /// Last top eigenvector of `X_AᵀX_A`, in full coordinates.
    eigvec: Option<Vec<f64>>,
}

impl<'a> Subproblem<'a> {
    pub fn new(full: &'a DesignMatrix, w: &'a WeightVector, beta0: Option<&[f64]>) -> Self {
        let beta = beta0.map_or_else(|| vec![0.0; full.d()], <[f64]>::to_vec);
        let xbeta = full.matvec(&beta);
        Self {
            full,
            full_weights: w,
            active: ActiveSet::full(full.d()),
            matrix: full.clone(),
            weights: w.clone(),
            beta,
            xbeta,
            eigvec: None,
        }
    }

    /// Lipschitz estimate of the current restricted matrix, warm-started
    /// from the previous estimate's eigenvector.
    pub fn lipschitz(&mut self) -> Result<f64> {
        let start = self.eigvec.as_deref().map(|v| self.active.gather(v));
        let (l, v) = power_iteration(&self.matrix, start.as_deref())?;
        self.eigvec = Some(self.active.expand(&v));
        Ok(l)
    }

    /// Certificate of the restricted problem at the current coefficients,
    /// plus the raw correlations `X_Aᵀ(X_A β_A − y)` (the full gradient).
    pub fn certificate(&self) -> Result<(GapCertificate, Vec<f64>)> {
        let rho: Vec<f64> = self
            .xbeta
            .iter()
            .zip(self.full.y())
            .map(|(p, y)| p - y)
            .collect();
        let corr = self.matrix.tmatvec(&rho);
        let cert = certificate_from_parts(self.full.y(), &rho, &corr, &self.beta, &self.weights)?;
        Ok((cert, corr))
    }

    pub fn full_beta(&self) -> Vec<f64> {
        self.active.expand(&self.beta)
    }

    pub fn full_certificate(&self) -> Result<GapCertificate> {
        gap_certificate(self.full, &self.full_beta(), self.full_weights)
    }

    /// Returns the full-problem certificate if the run may stop here.
    pub fn converged(&self, cert: &GapCertificate, epsilon: f64) -> Result<Option<GapCertificate>> {
        if cert.gap > epsilon {
            return Ok(None);
        }
        if self.active.is_full() {
            return Ok(Some(cert.clone()));
        }
        let full = self.full_certificate()?;
        Ok((full.gap <= epsilon).then_some(full))
    }

    /// Runs iterative screening with the given certificate. Screened
    /// coordinates are dropped (set to zero) and the subproblem rebuilt.
    pub fn screen(&mut self, cert: &GapCertificate, corr: &[f64]) -> Result<ScreenOutcome> {
        let scaled: Vec<f64> = corr.iter().map(|c| (c * cert.scale).abs()).collect();
        let next = screen_iterative(
            &self.active,
            &scaled,
            self.matrix.col_norms(),
            cert.clamped_gap(),
            &self.weights,
        )?;
        if next.len() == self.active.len() {
            return Ok(ScreenOutcome::Unchanged);
        }
        let full_beta = self.full_beta();
        self.active = next;
        if self.active.is_empty() {
            self.beta.clear();
            self.xbeta = vec![0.0; self.full.n()];
            return Ok(ScreenOutcome::Emptied);
        }
        self.beta = self.active.gather(&full_beta);
        self.matrix = self.full.select_columns(self.active.indices());
        self.weights = self.full_weights.truncated(self.active.len())?;
        self.xbeta = self.matrix.matvec(&self.beta);
        Ok(ScreenOutcome::Shrunk)
    }
}
