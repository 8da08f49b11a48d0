//! Regression problems: the dense design matrix, its response, and loaders.
//!
//! Storage is column-major because every screening pass and every gradient
//! evaluation walks whole columns. Sparse on-disk formats are densified.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, OwlError, Result};
use crate::linalg::{dot, norm2};

/// Dense `n × d` design matrix stored column-major, with its response vector
/// and cached Euclidean column norms.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
    y: Vec<f64>,
    col_norms: Vec<f64>,
}

impl DesignMatrix {
    /// Builds a matrix from column-major `values` (length `n * d`) and `y`.
    pub fn new(n: usize, d: usize, values: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check_len("matrix entries", n * d, values.len())?;
        check_len("response length", n, y.len())?;
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(OwlError::Degenerate(format!(
                "non-finite matrix entry at row {}, column {}",
                pos % n.max(1),
                pos / n.max(1)
            )));
        }
        if let Some(pos) = y.iter().position(|v| !v.is_finite()) {
            return Err(OwlError::Degenerate(format!(
                "non-finite response at row {pos}"
            )));
        }
        let col_norms = (0..d)
            .map(|j| norm2(&values[j * n..(j + 1) * n]))
            .collect();
        Ok(Self {
            n,
            d,
            values,
            y,
            col_norms,
        })
    }

    /// Builds a matrix from row-major rows.
    pub fn from_rows(rows: &[Vec<f64>], y: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, Vec::len);
        let mut values = vec![0.0; n * d];
        for (i, row) in rows.iter().enumerate() {
            check_len("row length", d, row.len())?;
            for (j, v) in row.iter().enumerate() {
                values[j * n + i] = *v;
            }
        }
        Self::new(n, d, values, y)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn col_norms(&self) -> &[f64] {
        &self.col_norms
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.values[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.n + i]
    }

    /// `X β`, skipping zero coefficients.
    pub fn matvec(&self, beta: &[f64]) -> Vec<f64> {
        debug_assert_eq!(beta.len(), self.d);
        let mut out = vec![0.0; self.n];
        for (j, &b) in beta.iter().enumerate() {
            if b != 0.0 {
                for (o, x) in out.iter_mut().zip(self.col(j)) {
                    *o += b * x;
                }
            }
        }
        out
    }

    /// `Xᵀ r`
    pub fn tmatvec(&self, r: &[f64]) -> Vec<f64> {
        debug_assert_eq!(r.len(), self.n);
        (0..self.d).map(|j| dot(self.col(j), r)).collect()
    }

    /// `X β − y`
    pub fn residual(&self, beta: &[f64]) -> Vec<f64> {
        let mut r = self.matvec(beta);
        for (ri, yi) in r.iter_mut().zip(&self.y) {
            *ri -= yi;
        }
        r
    }

    /// Column subset in the given order, keeping `y` and the cached norms.
    pub fn select_columns(&self, cols: &[usize]) -> DesignMatrix {
        let mut values = Vec::with_capacity(self.n * cols.len());
        for &j in cols {
            values.extend_from_slice(self.col(j));
        }
        DesignMatrix {
            n: self.n,
            d: cols.len(),
            values,
            y: self.y.clone(),
            col_norms: cols.iter().map(|&j| self.col_norms[j]).collect(),
        }
    }

    /// Row-major copy of the entries, used by the mini-batch solver.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut rows = vec![0.0; self.n * self.d];
        for j in 0..self.d {
            for (i, v) in self.col(j).iter().enumerate() {
                rows[i * self.d + j] = *v;
            }
        }
        rows
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.d).map(|j| self.get(i, j)).collect()
    }

    /// Centers every column, scales it to unit Euclidean norm and optionally
    /// centers `y`. Columns with no variance become all-zero columns.
    pub fn standardize(&self, center_y: bool) -> Result<DesignMatrix> {
        if self.n < 2 {
            return Err(OwlError::Degenerate(format!(
                "standardize needs at least 2 samples, got {}",
                self.n
            )));
        }
        let n = self.n;
        let mut values = self.values.clone();
        for j in 0..self.d {
            let col = &mut values[j * n..(j + 1) * n];
            let scale = col.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let mean = col.iter().sum::<f64>() / n as f64;
            col.iter_mut().for_each(|v| *v -= mean);
            let norm = norm2(col);
            if norm <= 1e-12 * scale * (n as f64).sqrt() || norm == 0.0 {
                col.iter_mut().for_each(|v| *v = 0.0);
            } else {
                col.iter_mut().for_each(|v| *v /= norm);
            }
        }
        let mut y = self.y.clone();
        if center_y {
            let mean = y.iter().sum::<f64>() / n as f64;
            y.iter_mut().for_each(|v| *v -= mean);
        }
        DesignMatrix::new(n, self.d, values, y)
    }

    /// Writes the matrix in libsvm text format, omitting zero entries.
    pub fn write_libsvm<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.n {
            write!(out, "{}", self.y[i])?;
            for j in 0..self.d {
                let v = self.get(i, j);
                if v != 0.0 {
                    write!(out, " {}:{}", j + 1, v)?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|source| OwlError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads a libsvm-format file (`<label> <index>:<value> ...`, 1-based,
/// strictly increasing indices). Blank lines and `#` comments are skipped.
pub fn load_libsvm(path: impl AsRef<Path>) -> Result<DesignMatrix> {
    let path = path.as_ref();
    let reader = BufReader::new(open(path)?);
    parse_libsvm(reader)
}

pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<DesignMatrix> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut d = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| OwlError::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().unwrap_or_default();
        let label: f64 = label_tok.parse().map_err(|_| OwlError::Parse {
            line: lineno,
            msg: format!("invalid label '{label_tok}'"),
        })?;
        let mut row = Vec::new();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok.split_once(':').ok_or_else(|| OwlError::Parse {
                line: lineno,
                msg: format!("expected index:value, got '{tok}'"),
            })?;
            let idx: usize = idx.parse().map_err(|_| OwlError::Parse {
                line: lineno,
                msg: format!("invalid feature index '{idx}'"),
            })?;
            if idx == 0 {
                return Err(OwlError::Parse {
                    line: lineno,
                    msg: "feature indices are 1-based".into(),
                });
            }
            if idx <= last {
                return Err(OwlError::Parse {
                    line: lineno,
                    msg: format!("feature indices must be strictly increasing ({idx} after {last})"),
                });
            }
            let val: f64 = val.parse().map_err(|_| OwlError::Parse {
                line: lineno,
                msg: format!("invalid value '{val}' for feature {idx}"),
            })?;
            last = idx;
            row.push((idx - 1, val));
        }
        d = d.max(last);
        labels.push(label);
        rows.push(row);
    }

    if labels.is_empty() {
        return Err(OwlError::Empty("no samples in libsvm input".into()));
    }
    let n = labels.len();
    let mut values = vec![0.0; n * d];
    for (i, row) in rows.iter().enumerate() {
        for &(j, v) in row {
            values[j * n + i] = v;
        }
    }
    DesignMatrix::new(n, d, values, labels)
}

/// Which CSV column is the response.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TargetColumn {
    Named(String),
    #[default]
    Last,
}

/// Loads a numeric CSV with a header row. The target column becomes `y`; the
/// remaining columns become `X` in header order.
pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn) -> Result<DesignMatrix> {
    let path = path.as_ref();
    parse_csv(open(path)?, target)
}

pub fn parse_csv<R: std::io::Read>(input: R, target: &TargetColumn) -> Result<DesignMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = rdr
        .headers()
        .map_err(|e| OwlError::Csv(format!("cannot read header: {e}")))?
        .clone();
    if headers.is_empty() {
        return Err(OwlError::Csv("empty header".into()));
    }
    let target_idx = match target {
        TargetColumn::Last => headers.len() - 1,
        TargetColumn::Named(name) => headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| OwlError::Csv(format!("target column '{name}' not found")))?,
    };

    let mut rows = Vec::new();
    let mut y = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row_no = r + 1;
        let record = record.map_err(|e| OwlError::Csv(format!("row {row_no}: {e}")))?;
        if record.len() != headers.len() {
            return Err(OwlError::Csv(format!(
                "row {row_no}: expected {} fields, got {}",
                headers.len(),
                record.len()
            )));
        }
        let mut row = Vec::with_capacity(headers.len() - 1);
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                OwlError::Csv(format!(
                    "row {row_no}, column {}: non-numeric value '{cell}'",
                    &headers[c]
                ))
            })?;
            if c == target_idx {
                y.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(OwlError::Empty("no samples".into()));
    }
    DesignMatrix::from_rows(&rows, y)
}

/// Parameters of a synthetic regression problem with grouped, strongly
/// correlated active features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub k_true: usize,
    pub group_size: usize,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(OwlError::Config("n and d must be at least 1".into()));
        }
        if self.group_size == 0 {
            return Err(OwlError::Config("group_size must be at least 1".into()));
        }
        if self.k_true > self.d || self.k_true * self.group_size > self.d {
            return Err(OwlError::Config(format!(
                "k_true * group_size = {} exceeds d = {}",
                self.k_true * self.group_size,
                self.d
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(OwlError::Config("noise_sd must be finite and non-negative".into()));
        }
        Ok(())
    }
}

/// Draws a synthetic problem. Columns are standard normal; each of the
/// `k_true` groups is one base column plus `group_size - 1` copies with
/// N(0, 0.01) perturbations. Returns the matrix and the true coefficients.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(DesignMatrix, Vec<f64>)> {
    spec.validate()?;
    let SyntheticSpec {
        n,
        d,
        k_true,
        group_size,
        noise_sd,
        seed,
    } = *spec;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values: Vec<f64> = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();

    let mut perm: Vec<usize> = (0..d).collect();
    perm.shuffle(&mut rng);
    let mut beta = vec![0.0; d];
    for g in 0..k_true {
        let members = &perm[g * group_size..(g + 1) * group_size];
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let base = members[0];
        for &j in &members[1..] {
            for i in 0..n {
                let noise: f64 = rng.sample(StandardNormal);
                values[j * n + i] = values[base * n + i] + 0.1 * noise;
            }
        }
        for &j in members {
            beta[j] = sign;
        }
    }

    let mut y = vec![0.0; n];
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            for i in 0..n {
                y[i] += b * values[j * n + i];
            }
        }
    }
    if noise_sd > 0.0 {
        for yi in &mut y {
            let e: f64 = rng.sample(StandardNormal);
            *yi += noise_sd * e;
        }
    }
    Ok((DesignMatrix::new(n, d, values, y)?, beta))
}

/// Root mean squared error between two vectors.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    check_len("rmse operands", pred.len(), truth.len())?;
    if pred.is_empty() {
        return Err(OwlError::Empty("rmse of empty vectors".into()));
    }
    let sse: f64 = pred.iter().zip(truth).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}
