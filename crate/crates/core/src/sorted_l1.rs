//! The ordered weighted L1 norm family.
//!
//! `Ω_λ(β) = Σ_i λ_i |β|_[i]` where `|β|_[1] ≥ |β|_[2] ≥ …` and `λ` is
//! non-negative and non-increasing. OSCAR and Lasso are special cases.

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::error::{check_len, OwlError, Result};

/// Where a weight vector came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightProvenance {
    Oscar {
        alpha1: f64,
        alpha2: f64,
        p: Option<f64>,
        tau: Option<f64>,
    },
    Lasso { lambda0: f64 },
    Linf { lambda1: f64 },
    Custom,
}

/// Validated regularization weights: finite, non-negative, non-increasing,
/// with a strictly positive leading weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    lambda: Vec<f64>,
    provenance: WeightProvenance,
}

impl WeightVector {
    pub fn new(lambda: Vec<f64>, provenance: WeightProvenance) -> Result<Self> {
        if lambda.is_empty() {
            return Err(OwlError::Weights("weight vector is empty".into()));
        }
        for (i, w) in lambda.iter().enumerate() {
            if !w.is_finite() || *w < 0.0 {
                return Err(OwlError::Weights(format!(
                    "weight {} = {w} is not a finite non-negative number",
                    i + 1
                )));
            }
        }
        if let Some(i) = lambda.windows(2).position(|p| p[1] > p[0]) {
            return Err(OwlError::Weights(format!(
                "weights must be non-increasing: λ{} = {} < λ{} = {}",
                i + 1,
                lambda[i],
                i + 2,
                lambda[i + 1]
            )));
        }
        if lambda[0] <= 0.0 {
            return Err(OwlError::Weights("all weights are zero".into()));
        }
        Ok(Self { lambda, provenance })
    }

    pub fn custom(lambda: Vec<f64>) -> Result<Self> {
        Self::new(lambda, WeightProvenance::Custom)
    }

    /// Constant weights: the Lasso penalty `λ₀‖β‖₁`.
    pub fn lasso(d: usize, lambda0: f64) -> Result<Self> {
        Self::new(vec![lambda0; d], WeightProvenance::Lasso { lambda0 })
    }

    /// Only the leading weight is nonzero: `λ₁‖β‖_∞`.
    pub fn linf(d: usize, lambda1: f64) -> Result<Self> {
        let mut lambda = vec![0.0; d];
        if let Some(first) = lambda.first_mut() {
            *first = lambda1;
        }
        Self::new(lambda, WeightProvenance::Linf { lambda1 })
    }

    /// Reads one weight per line; blank lines and `#` comments are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| OwlError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut lambda = Vec::new();
        for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| OwlError::Parse {
                line: lineno + 1,
                msg: e.to_string(),
            })?;
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let w: f64 = content.parse().map_err(|_| OwlError::Parse {
                line: lineno + 1,
                msg: format!("invalid weight '{content}'"),
            })?;
            lambda.push(w);
        }
        Self::custom(lambda)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambda
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn provenance(&self) -> &WeightProvenance {
        &self.provenance
    }

    /// `λ_m` with 1-based `m`.
    pub fn lambda_at(&self, m: usize) -> f64 {
        self.lambda[m - 1]
    }

    /// The leading `m` weights, i.e. the weights of a problem restricted to
    /// `m` surviving features.
    pub fn truncated(&self, m: usize) -> Result<WeightVector> {
        if m == 0 || m > self.lambda.len() {
            return Err(OwlError::Weights(format!(
                "cannot truncate {} weights to {m}",
                self.lambda.len()
            )));
        }
        Ok(WeightVector {
            lambda: self.lambda[..m].to_vec(),
            provenance: self.provenance.clone(),
        })
    }
}

/// OSCAR weights `λ_i = α₁ + α₂(d − i)` for `i = 1..d`.
pub fn oscar_weights(d: usize, alpha1: f64, alpha2: f64) -> Result<WeightVector> {
    oscar_with(d, alpha1, alpha2, None, None)
}

fn oscar_with(
    d: usize,
    alpha1: f64,
    alpha2: f64,
    p: Option<f64>,
    tau: Option<f64>,
) -> Result<WeightVector> {
    if d == 0 {
        return Err(OwlError::Weights("d must be at least 1".into()));
    }
    if !(alpha1 >= 0.0 && alpha2 >= 0.0) {
        return Err(OwlError::Weights(format!(
            "alpha1 = {alpha1} and alpha2 = {alpha2} must be non-negative"
        )));
    }
    let lambda = (1..=d)
        .map(|i| alpha1 + alpha2 * (d - i) as f64)
        .collect();
    WeightVector::new(
        lambda,
        WeightProvenance::Oscar {
            alpha1,
            alpha2,
            p,
            tau,
        },
    )
}

/// Sparsity factor `p_i = i · e^{−τ}`.
pub fn sparsity_factor(i: u32, tau: f64) -> f64 {
    i as f64 * (-tau).exp()
}

/// Data-scaled OSCAR weights: `α₁ = p ‖Xᵀy‖_∞`, `α₂ = α₁ / d`.
pub fn oscar_weights_from_data(m: &DesignMatrix, p: f64) -> Result<WeightVector> {
    oscar_from_data_tagged(m, p, None)
}

pub fn oscar_weights_from_tau(m: &DesignMatrix, i: u32, tau: f64) -> Result<WeightVector> {
    oscar_from_data_tagged(m, sparsity_factor(i, tau), Some(tau))
}

fn oscar_from_data_tagged(m: &DesignMatrix, p: f64, tau: Option<f64>) -> Result<WeightVector> {
    if m.d() == 0 || m.n() == 0 {
        return Err(OwlError::Empty("design matrix has no entries".into()));
    }
    if !(p > 0.0 && p.is_finite()) {
        return Err(OwlError::Weights(format!("sparsity factor p = {p} must be positive")));
    }
    let xty_inf = m
        .tmatvec(m.y())
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if xty_inf == 0.0 {
        return Err(OwlError::Degenerate(
            "response orthogonal to all features".into(),
        ));
    }
    let alpha1 = p * xty_inf;
    let alpha2 = alpha1 / m.d() as f64;
    oscar_with(m.d(), alpha1, alpha2, Some(p), tau)
}

/// Indices of `v` ordered by decreasing magnitude; equal magnitudes keep
/// ascending index order.
pub(crate) fn order_by_magnitude(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    idx
}

fn sorted_magnitudes(v: &[f64]) -> Vec<f64> {
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags
}

/// `Ω_λ(β)`
pub fn owl_norm(beta: &[f64], w: &WeightVector) -> Result<f64> {
    check_len("owl_norm", w.len(), beta.len())?;
    Ok(sorted_magnitudes(beta)
        .iter()
        .zip(w.as_slice())
        .map(|(b, l)| b * l)
        .sum())
}

/// Dual norm of `Ω_λ`: `max_k (Σ_{i≤k} |c|_[i]) / (Σ_{i≤k} λ_i)`.
/// A vector `c = Xᵀθ` is dual feasible iff this is at most one.
pub fn dual_norm(c: &[f64], w: &WeightVector) -> Result<f64> {
    check_len("dual_norm", w.len(), c.len())?;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut best = 0.0_f64;
    for (m, l) in sorted_magnitudes(c).iter().zip(w.as_slice()) {
        num += m;
        den += l;
        best = best.max(num / den);
    }
    Ok(best)
}

/// Proximal operator of `step · Ω_λ`:
/// `argmin_x ½‖v − x‖² + step · Σ λ_i |x|_[i]`.
///
/// Sorts `|v|`, subtracts the scaled weights, projects onto non-increasing
/// sequences with pool-adjacent-violators, clips at zero and undoes the sort.
pub fn prox_owl(v: &[f64], w: &WeightVector, step: f64) -> Result<Vec<f64>> {
    check_len("prox_owl", w.len(), v.len())?;
    if !(step > 0.0) {
        return Err(OwlError::Config(format!("prox step {step} must be positive")));
    }
    let mut out = vec![0.0; v.len()];
    prox_owl_into(v, w.as_slice(), step, &mut out);
    Ok(out)
}

/// Unchecked prox used on solver hot paths. `lambda.len() == v.len() == out.len()`.
pub(crate) fn prox_owl_into(v: &[f64], lambda: &[f64], step: f64, out: &mut [f64]) {
    let order = order_by_magnitude(v);
    let z: Vec<f64> = order
        .iter()
        .zip(lambda)
        .map(|(&i, &l)| v[i].abs() - step * l)
        .collect();
    let fitted = pava_non_increasing(&z);
    for (&i, x) in order.iter().zip(fitted) {
        let mag = x.max(0.0);
        out[i] = if v[i] < 0.0 { -mag } else { mag };
    }
}

/// Least-squares projection of `z` onto non-increasing sequences, using a
/// stack of pooled blocks. Blocks merge only on a strict increase.
pub fn pava_non_increasing(z: &[f64]) -> Vec<f64> {
    // (sum, count) per block
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(z.len());
    for &value in z {
        let mut sum = value;
        let mut count = 1usize;
        while let Some(&(psum, pcount)) = blocks.last() {
            if psum / (pcount as f64) < sum / (count as f64) {
                sum += psum;
                count += pcount;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push((sum, count));
    }
    let mut out = Vec::with_capacity(z.len());
    for (sum, count) in blocks {
        let mean = if count == 1 { sum } else { sum / count as f64 };
        out.extend(std::iter::repeat_n(mean, count));
    }
    out
}
