//! Duality-gap safe screening for OWL regression.
//!
//! A feature `i` with `|x_iᵀθ| + ‖x_i‖√(2G) < λ_m` is zero at the optimum,
//! where `m` is the number of features that have not yet been screened. The
//! screened features take the smallest weights `λ_{m+1..d}`, so the remaining
//! problem is an OWL problem with weights `λ_1..λ_m`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::dataset::DesignMatrix;
use crate::error::{check_len, OwlError, Result};
use crate::sorted_l1::WeightVector;

/// Surviving features, as strictly increasing original column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSet {
    active: Vec<usize>,
    d_total: usize,
}

impl ActiveSet {
    pub fn full(d: usize) -> Self {
        Self {
            active: (0..d).collect(),
            d_total: d,
        }
    }

    pub fn from_indices(active: Vec<usize>, d_total: usize) -> Result<Self> {
        if active.windows(2).any(|p| p[0] >= p[1]) {
            return Err(OwlError::Config("active indices must be strictly increasing".into()));
        }
        if active.last().is_some_and(|&i| i >= d_total) {
            return Err(OwlError::Config(format!(
                "active index out of range for d = {d_total}"
            )));
        }
        Ok(Self { active, d_total })
    }

    pub fn indices(&self) -> &[usize] {
        &self.active
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn d_total(&self) -> usize {
        self.d_total
    }

    /// `m`: the active subproblem uses `λ_1..λ_m`.
    pub fn weight_cutoff(&self) -> usize {
        self.active.len()
    }

    pub fn is_full(&self) -> bool {
        self.active.len() == self.d_total
    }

    /// Scatters a restricted vector back into full coordinates.
    pub fn expand(&self, sub: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.d_total];
        for (&j, &v) in self.active.iter().zip(sub) {
            full[j] = v;
        }
        full
    }

    /// Gathers the active coordinates of a full vector.
    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.active.iter().map(|&j| full[j]).collect()
    }
}

/// Single-feature test: `corr + col_norm·√(2·gap) < λ_m` (strict).
#[inline]
pub fn screen_test(corr: f64, col_norm: f64, gap: f64, lambda_m: f64) -> bool {
    corr + col_norm * (2.0 * gap).sqrt() < lambda_m
}

/// Positions (into `corr`) that survive repeated screening passes. Each pass
/// uses `λ_m` with `m` the survivor count before the pass; removals are
/// applied between passes.
fn iterate_to_fixed_point(corr: &[f64], col_norms: &[f64], gap: f64, lambda: &[f64]) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..corr.len()).collect();
    while !keep.is_empty() {
        let threshold = lambda[keep.len() - 1];
        let before = keep.len();
        keep.retain(|&p| !screen_test(corr[p], col_norms[p], gap, threshold));
        if keep.len() == before {
            break;
        }
    }
    keep
}

/// Iterative screening: repeats the single-feature test, tightening the
/// threshold to `λ_m` as the active count `m` shrinks, until nothing changes.
///
/// `corr[k] = |x_iᵀθ|` and `col_norms[k] = ‖x_i‖` for the `k`-th active index
/// `i`. `w` holds the weights of the full problem (or of any problem whose
/// leading `|active|` weights are the active subproblem's).
pub fn screen_iterative(
    a: &ActiveSet,
    corr: &[f64],
    col_norms: &[f64],
    gap: f64,
    w: &WeightVector,
) -> Result<ActiveSet> {
    check_len("screening correlations", a.len(), corr.len())?;
    check_len("screening column norms", a.len(), col_norms.len())?;
    if a.len() > w.len() {
        return Err(OwlError::Dimension {
            what: "weights for active set",
            expected: a.len(),
            got: w.len(),
        });
    }
    let keep = iterate_to_fixed_point(corr, col_norms, gap.max(0.0), w.as_slice());
    Ok(ActiveSet {
        active: keep.into_iter().map(|p| a.active[p]).collect(),
        d_total: a.d_total,
    })
}

/// The subproblem on the active columns.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub matrix: DesignMatrix,
    pub weights: WeightVector,
    pub beta: Vec<f64>,
}

/// Restricts the problem to the active set: column subset, leading `m`
/// weights, and active coefficients. Fails if `beta` is nonzero off the set.
pub fn restrict(
    m: &DesignMatrix,
    a: &ActiveSet,
    w: &WeightVector,
    beta: &[f64],
) -> Result<Restriction> {
    check_len("coefficients", m.d(), beta.len())?;
    check_len("active set dimension", m.d(), a.d_total)?;
    check_len("weights", m.d(), w.len())?;
    let mut next = a.active.iter().peekable();
    for (j, &b) in beta.iter().enumerate() {
        if next.peek() == Some(&&j) {
            next.next();
        } else if b != 0.0 {
            return Err(OwlError::Safety { index: j, value: b });
        }
    }
    if a.is_empty() {
        return Err(OwlError::Degenerate("active set is empty".into()));
    }
    Ok(Restriction {
        matrix: m.select_columns(&a.active),
        weights: w.truncated(a.len())?,
        beta: a.gather(beta),
    })
}

/// One row of a screening trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iter: usize,
    pub gap: f64,
    pub active: usize,
    pub screen_rate: f64,
    pub elapsed_ms: f64,
}

/// Per-outer-iteration screening history of one solve.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ScreeningTrace {
    pub d_total: usize,
    pub rows: Vec<TraceRow>,
}

impl ScreeningTrace {
    pub fn new(d_total: usize) -> Self {
        Self {
            d_total,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, iter: usize, gap: f64, active: usize, elapsed_ms: f64) {
        self.rows.push(TraceRow {
            iter,
            gap,
            active,
            screen_rate: 0.0,
            elapsed_ms,
        });
    }

    /// Fills in the screening rate of every row given the number of features
    /// that are zero in the final solution: the fraction of them already
    /// screened at each iteration. With no zero features the rate is 1.
    pub fn finalize_rates(&mut self, final_zero_count: usize) {
        for row in &mut self.rows {
            row.screen_rate = screening_rate(self.d_total, row.active, final_zero_count);
        }
    }

    pub fn active_history(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.active).collect()
    }

    /// Writes `iter,gap,active,screen_rate,elapsed_ms`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        for row in &self.rows {
            wtr.serialize(row).map_err(|e| OwlError::Csv(e.to_string()))?;
        }
        if self.rows.is_empty() {
            wtr.write_record(["iter", "gap", "active", "screen_rate", "elapsed_ms"])
                .map_err(|e| OwlError::Csv(e.to_string()))?;
        }
        wtr.flush().map_err(|e| OwlError::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(input: R, d_total: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let rows = rdr
            .deserialize()
            .collect::<std::result::Result<Vec<TraceRow>, _>>()
            .map_err(|e| OwlError::Csv(e.to_string()))?;
        Ok(Self { d_total, rows })
    }
}

/// `(d − |active|) / final_zero_count`, clamped to [0, 1].
pub fn screening_rate(d_total: usize, active: usize, final_zero_count: usize) -> f64 {
    if final_zero_count == 0 {
        return 1.0;
    }
    let screened = d_total.saturating_sub(active) as f64;
    (screened / final_zero_count as f64).clamp(0.0, 1.0)
}
