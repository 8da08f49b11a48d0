//! Feasible dual points and duality-gap certificates.
//!
//! Primal: `P(β) = ½‖y − Xβ‖² + Ω_λ(β)`.
//! Dual:   `D(θ) = −½‖θ‖² − θᵀy` subject to `dual_norm(Xᵀθ, λ) ≤ 1`.
//! At the optimum `θ⋆ = Xβ⋆ − y`, and since `D` is 1-strongly concave any
//! feasible `θ` satisfies `‖θ − θ⋆‖ ≤ √(2 (P(β) − D(θ)))`.

use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::error::{check_len, Result};
use crate::linalg::{dot, norm2_sq};
use crate::sorted_l1::{dual_norm, owl_norm, WeightVector};

/// A feasible dual point together with the primal/dual values it certifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCertificate {
    pub theta: Vec<f64>,
    pub primal: f64,
    pub dual: f64,
    /// `primal − dual` as computed; may be slightly negative from rounding.
    pub gap: f64,
    /// Factor in (0, 1] applied to the residual to reach the dual ball.
    pub scale: f64,
}

impl GapCertificate {
    /// Gap clamped at zero, for use under square roots.
    pub fn clamped_gap(&self) -> f64 {
        self.gap.max(0.0)
    }

    /// `√(2G)`: radius of the ball around `theta` that contains `θ⋆`.
    pub fn safe_radius(&self) -> f64 {
        (2.0 * self.clamped_gap()).sqrt()
    }
}

pub fn primal_value(m: &DesignMatrix, beta: &[f64], w: &WeightVector) -> Result<f64> {
    check_len("coefficients", m.d(), beta.len())?;
    let r = m.residual(beta);
    Ok(0.5 * norm2_sq(&r) + owl_norm(beta, w)?)
}

pub fn dual_value(m: &DesignMatrix, theta: &[f64]) -> Result<f64> {
    check_len("dual point", m.n(), theta.len())?;
    Ok(-0.5 * norm2_sq(theta) - dot(theta, m.y()))
}

/// Scales the residual `Xβ − y` into the dual-feasible set. Returns the dual
/// point and the scale `1 / max(1, dual_norm(Xᵀρ, λ))`.
pub fn feasible_dual_point(
    m: &DesignMatrix,
    beta: &[f64],
    w: &WeightVector,
) -> Result<(Vec<f64>, f64)> {
    check_len("coefficients", m.d(), beta.len())?;
    check_len("weights", m.d(), w.len())?;
    let rho = m.residual(beta);
    let corr = m.tmatvec(&rho);
    let scale = feasibility_scale(&corr, w)?;
    Ok((rho.into_iter().map(|r| r * scale).collect(), scale))
}

fn feasibility_scale(corr: &[f64], w: &WeightVector) -> Result<f64> {
    let s = dual_norm(corr, w)?;
    Ok(1.0 / s.max(1.0))
}

pub fn gap_certificate(m: &DesignMatrix, beta: &[f64], w: &WeightVector) -> Result<GapCertificate> {
    check_len("coefficients", m.d(), beta.len())?;
    check_len("weights", m.d(), w.len())?;
    let rho = m.residual(beta);
    let corr = m.tmatvec(&rho);
    certificate_from_parts(m.y(), &rho, &corr, beta, w)
}

/// Assembles a certificate from the residual `ρ = Xβ − y` and `Xᵀρ`, which
/// the solvers already hold. Neither product is recomputed.
pub(crate) fn certificate_from_parts(
    y: &[f64],
    rho: &[f64],
    corr: &[f64],
    beta: &[f64],
    w: &WeightVector,
) -> Result<GapCertificate> {
    let scale = feasibility_scale(corr, w)?;
    let theta: Vec<f64> = rho.iter().map(|r| r * scale).collect();
    let primal = 0.5 * norm2_sq(rho) + owl_norm(beta, w)?;
    let dual = -0.5 * norm2_sq(&theta) - dot(&theta, y);
    Ok(GapCertificate {
        theta,
        primal,
        dual,
        gap: primal - dual,
        scale,
    })
}
