//! Proximal gradient solvers with optional safe screening.
//!
//! Both solvers work on the subproblem restricted to the current active set.
//! Each outer iteration builds a gap certificate for that subproblem, stops
//! once the full-problem gap is below `epsilon`, and otherwise screens before
//! taking its next step.

mod apgd;
mod lipschitz;
mod spgd;
mod subproblem;

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::duality::GapCertificate;
use crate::error::{check_len, OwlError, Result};
use crate::screening::{ActiveSet, ScreeningTrace};
use crate::sorted_l1::WeightVector;

pub use lipschitz::{lipschitz_estimate, step_size, STEP_INFLATION};
pub use spgd::default_eta;

pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_OUTER_APGD: usize = 10_000;
pub const DEFAULT_MAX_OUTER_SPGD: usize = 1_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Apgd,
    Spgd,
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Apgd => "apgd",
            Mode::Spgd => "spgd",
        })
    }
}

/// Inner-loop settings of the stochastic solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpgdParams {
    /// Inner-loop length `T`.
    pub inner_steps: usize,
    /// Mini-batch size `l`, at most `n`. Front ends should clamp the
    /// default to `n` on small data sets.
    pub batch_size: usize,
    /// Fixed step size `η`. When unset, the step is derived from the active
    /// columns and refreshed whenever the active set shrinks.
    pub eta: Option<f64>,
}

impl SpgdParams {
    /// Caps the mini-batch at `n` samples.
    pub fn clamped_to(mut self, n: usize) -> Self {
        self.batch_size = self.batch_size.min(n.max(1));
        self
    }
}

impl Default for SpgdParams {
    fn default() -> Self {
        Self {
            inner_steps: 20,
            batch_size: 50,
            eta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// Outer-iteration cap; `None` picks the per-mode default.
    pub max_outer: Option<usize>,
    pub screening: bool,
    pub mode: Mode,
    pub spgd: SpgdParams,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warm_start_beta: Option<Vec<f64>>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            max_outer: None,
            screening: true,
            mode: Mode::Apgd,
            spgd: SpgdParams::default(),
            seed: 0,
            warm_start_beta: None,
        }
    }
}

impl SolverConfig {
    pub fn apgd(screening: bool) -> Self {
        Self {
            screening,
            ..Self::default()
        }
    }

    pub fn spgd(screening: bool, spgd: SpgdParams) -> Self {
        Self {
            screening,
            mode: Mode::Spgd,
            spgd,
            ..Self::default()
        }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_outer(mut self, max_outer: usize) -> Self {
        self.max_outer = Some(max_outer);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn effective_max_outer(&self) -> usize {
        self.max_outer.unwrap_or(match self.mode {
            Mode::Apgd => DEFAULT_MAX_OUTER_APGD,
            Mode::Spgd => DEFAULT_MAX_OUTER_SPGD,
        })
    }

    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(OwlError::Config("epsilon must be positive".into()));
        }
        if self.effective_max_outer() == 0 {
            return Err(OwlError::Config("max_outer must be at least 1".into()));
        }
        if self.mode == Mode::Spgd {
            if self.spgd.inner_steps == 0 {
                return Err(OwlError::Config("inner loop length T must be at least 1".into()));
            }
            if self.spgd.batch_size == 0 || self.spgd.batch_size > n {
                return Err(OwlError::Config(format!(
                    "mini-batch size must be in [1, {n}], got {}",
                    self.spgd.batch_size
                )));
            }
            if let Some(eta) = self.spgd.eta {
                if !(eta > 0.0 && eta.is_finite()) {
                    return Err(OwlError::Config("eta must be positive".into()));
                }
            }
        }
        if let Some(beta) = &self.warm_start_beta {
            check_len("warm start coefficients", d, beta.len())?;
            if beta.iter().any(|b| !b.is_finite()) {
                return Err(OwlError::Config("warm start contains non-finite values".into()));
            }
        }
        Ok(())
    }
}

/// Outcome of one solve.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Final coefficients in full coordinates.
    pub beta: Vec<f64>,
    /// Certificate of the full problem at `beta`.
    pub certificate: GapCertificate,
    /// Outer iterations (certificates computed).
    pub iterations: usize,
    pub trace: ScreeningTrace,
    pub wall_time: Duration,
    /// False when `max_outer` was reached before the gap fell below epsilon.
    pub converged: bool,
    pub final_active: ActiveSet,
}

impl SolveResult {
    pub fn nonzeros(&self) -> Vec<(usize, f64)> {
        self.beta
            .iter()
            .enumerate()
            .filter(|(_, b)| **b != 0.0)
            .map(|(j, b)| (j, *b))
            .collect()
    }

    pub fn to_record(&self, config: &SolverConfig) -> ResultRecord {
        let mut config_echo = config.clone();
        config_echo.warm_start_beta = None;
        ResultRecord {
            d: self.beta.len(),
            beta_nonzeros: self.nonzeros(),
            gap: self.certificate.gap,
            iterations: self.iterations,
            wall_ms: self.wall_time.as_secs_f64() * 1e3,
            active_history: self.trace.active_history(),
            converged: self.converged,
            config_echo,
        }
    }
}

/// The JSON form of a solve:
/// `{d, beta_nonzeros: [[index, value]], gap, iterations, wall_ms,
///   active_history: [int], converged, config_echo}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub d: usize,
    pub beta_nonzeros: Vec<(usize, f64)>,
    pub gap: f64,
    pub iterations: usize,
    pub wall_ms: f64,
    pub active_history: Vec<usize>,
    pub converged: bool,
    pub config_echo: SolverConfig,
}

impl ResultRecord {
    pub fn dense_beta(&self) -> Vec<f64> {
        let mut beta = vec![0.0; self.d];
        for &(j, v) in &self.beta_nonzeros {
            beta[j] = v;
        }
        beta
    }
}

/// What an observer sees at every outer iteration, before screening.
#[derive(Debug)]
pub struct IterationEvent<'a> {
    pub iter: usize,
    pub active: &'a ActiveSet,
    /// Coefficients on the active set, in `active` order.
    pub beta_active: &'a [f64],
    /// Certificate of the subproblem restricted to `active`.
    pub certificate: &'a GapCertificate,
}

/// Solves with the solver selected by `cfg.mode`.
pub fn solve(m: &DesignMatrix, w: &WeightVector, cfg: &SolverConfig) -> Result<SolveResult> {
    solve_observed(m, w, cfg, |_| {})
}

/// Like [`solve`], calling `observer` once per outer iteration.
pub fn solve_observed(
    m: &DesignMatrix,
    w: &WeightVector,
    cfg: &SolverConfig,
    observer: impl FnMut(&IterationEvent<'_>),
) -> Result<SolveResult> {
    check_len("weights", m.d(), w.len())?;
    cfg.validate(m.n(), m.d())?;
    match cfg.mode {
        Mode::Apgd => apgd::run(m, w, cfg, observer),
        Mode::Spgd => spgd::run(m, w, cfg, observer),
    }
}

/// Accelerated proximal gradient (FISTA) with optional screening.
pub fn apgd(m: &DesignMatrix, w: &WeightVector, cfg: &SolverConfig) -> Result<SolveResult> {
    let cfg = SolverConfig {
        mode: Mode::Apgd,
        ..cfg.clone()
    };
    solve(m, w, &cfg)
}

/// Variance-reduced stochastic proximal gradient with optional screening.
pub fn spgd(m: &DesignMatrix, w: &WeightVector, cfg: &SolverConfig) -> Result<SolveResult> {
    let cfg = SolverConfig {
        mode: Mode::Spgd,
        ..cfg.clone()
    };
    solve(m, w, &cfg)
}

/// Solves a sequence of problems, warm-starting each from the previous
/// solution. Screening state never carries over, only the coefficients.
pub fn solve_path(
    m: &DesignMatrix,
    weights: &[WeightVector],
    cfg: &SolverConfig,
) -> Result<Vec<SolveResult>> {
    if let Some(bad) = weights.iter().find(|w| w.len() != m.d()) {
        return Err(OwlError::Dimension {
            what: "path weights",
            expected: m.d(),
            got: bad.len(),
        });
    }
    let mut results: Vec<SolveResult> = Vec::with_capacity(weights.len());
    let mut cfg = cfg.clone();
    for w in weights {
        if let Some(prev) = results.last() {
            cfg.warm_start_beta = Some(prev.beta.clone());
        }
        results.push(solve(m, w, &cfg)?);
    }
    Ok(results)
}

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub(crate) fn finish(
    beta: Vec<f64>,
    certificate: GapCertificate,
    iterations: usize,
    mut trace: ScreeningTrace,
    start: Instant,
    converged: bool,
    final_active: ActiveSet,
) -> SolveResult {
    let zeros = beta.iter().filter(|b| **b == 0.0).count();
    trace.finalize_rates(zeros);
    SolveResult {
        beta,
        certificate,
        iterations,
        trace,
        wall_time: start.elapsed(),
        converged,
        final_active,
    }
}
