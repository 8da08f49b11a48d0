use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "owlscreen", version, about = "OWL/OSCAR regression with safe screening")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one problem; writes result.json and trace.csv.
    #[command(args_override_self = true)]
    Solve(RunArgs),
    /// Time apgd, spgd, with and without screening.
    #[command(args_override_self = true)]
    Bench(BenchArgs),
    /// Per-iteration screening trace as CSV.
    #[command(args_override_self = true)]
    Trace(TraceArgs),
    /// Write a synthetic data set in libsvm format.
    #[command(args_override_self = true)]
    Gen(GenArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// key=value file with defaults for any of the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub weights: WeightArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Directory for output files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Trials per variant.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Test hook: perturb one variant's coefficients before the safety check.
    #[arg(long, hide = true)]
    pub inject_disagreement: bool,
}

#[derive(Debug, Clone, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub data: DataArgs,
    /// libsvm output path; the true coefficients go to `<out>.true_beta`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct DataArgs {
    #[arg(long, value_name = "PATH")]
    pub libsvm: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    /// CSV target column (default: last column).
    #[arg(long)]
    pub target: Option<String>,
    /// Generate data instead of loading it.
    #[arg(long)]
    pub synthetic: bool,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub k_true: Option<usize>,
    #[arg(long)]
    pub group_size: Option<usize>,
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Seed of the synthetic generator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Center and unit-normalize columns, center the response.
    #[arg(long)]
    pub standardize: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct WeightArgs {
    /// OSCAR weights with α₁ = p‖Xᵀy‖∞, α₂ = α₁/d.
    #[arg(long)]
    pub oscar_p: Option<f64>,
    /// OSCAR weights with p = i·e^(−τ).
    #[arg(long)]
    pub oscar_tau: Option<f64>,
    /// Index i for --oscar-tau.
    #[arg(long)]
    pub oscar_index: Option<u32>,
    /// Constant weights λ₀ (the lasso).
    #[arg(long)]
    pub lasso: Option<f64>,
    /// Whitespace-separated non-increasing weights.
    #[arg(long, value_name = "PATH")]
    pub weights_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Apgd,
    Spgd,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum)]
    pub solver: Option<SolverKind>,
    #[arg(long, value_enum)]
    pub screening: Option<Switch>,
    /// Duality-gap tolerance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    /// SPGD inner-loop length T.
    #[arg(long)]
    pub inner_steps: Option<usize>,
    /// SPGD mini-batch size l.
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// SPGD step size; derived from the data when unset.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Seed of the SPGD mini-batch sampler.
    #[arg(long)]
    pub solver_seed: Option<u64>,
}

/// Parsed `key = value` config file. Keys are long flag names; `_` and `-`
/// are interchangeable.
pub struct ConfigFile {
    path: PathBuf,
    entries: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("cannot open {}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::input(format!(
                    "{}:{}: expected key = value",
                    path.display(),
                    no + 1
                )));
            };
            entries.insert(k.trim().replace('_', "-"), v.trim().to_string());
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }

    fn fill<T: std::str::FromStr>(&self, key: &str, slot: &mut Option<T>) -> Result<(), CliError> {
        if slot.is_some() {
            return Ok(());
        }
        if let Some(raw) = self.entries.get(key) {
            let v = raw.parse().map_err(|_| {
                CliError::input(format!("{}: bad value {raw:?} for {key}", self.path.display()))
            })?;
            *slot = Some(v);
        }
        Ok(())
    }

    fn flag(&self, key: &str, slot: &mut bool) -> Result<(), CliError> {
        let mut v: Option<bool> = None;
        self.fill(key, &mut v)?;
        *slot |= v.unwrap_or(false);
        Ok(())
    }

    fn check_known(&self, known: &[&str]) -> Result<(), CliError> {
        match self.entries.keys().find(|k| !known.contains(&k.as_str())) {
            Some(k) => Err(CliError::input(format!(
                "{}: unknown key {k:?}",
                self.path.display()
            ))),
            None => Ok(()),
        }
    }
}

const DATA_KEYS: &[&str] = &[
    "libsvm", "csv", "target", "synthetic", "n", "d", "k-true", "group-size", "noise-sd", "seed",
    "standardize",
];
const WEIGHT_KEYS: &[&str] = &["oscar-p", "oscar-tau", "oscar-index", "lasso", "weights-file"];
const SOLVER_KEYS: &[&str] = &[
    "solver", "screening", "epsilon", "max-outer", "inner-steps", "batch-size", "eta",
    "solver-seed",
];

impl DataArgs {
    fn has_source(&self) -> bool {
        self.libsvm.is_some() || self.csv.is_some() || self.synthetic
    }

    fn merge(&mut self, cfg: &ConfigFile) -> Result<(), CliError> {
        // a source on the command line replaces the file's source entirely
        if !self.has_source() {
            cfg.fill("libsvm", &mut self.libsvm)?;
            cfg.fill("csv", &mut self.csv)?;
            cfg.flag("synthetic", &mut self.synthetic)?;
        }
        cfg.fill("target", &mut self.target)?;
        cfg.fill("n", &mut self.n)?;
        cfg.fill("d", &mut self.d)?;
        cfg.fill("k-true", &mut self.k_true)?;
        cfg.fill("group-size", &mut self.group_size)?;
        cfg.fill("noise-sd", &mut self.noise_sd)?;
        cfg.fill("seed", &mut self.seed)?;
        cfg.flag("standardize", &mut self.standardize)
    }
}

impl WeightArgs {
    fn has_kind(&self) -> bool {
        self.oscar_p.is_some()
            || self.oscar_tau.is_some()
            || self.lasso.is_some()
            || self.weights_file.is_some()
    }

    fn merge(&mut self, cfg: &ConfigFile) -> Result<(), CliError> {
        if self.has_kind() {
            return Ok(());
        }
        cfg.fill("oscar-p", &mut self.oscar_p)?;
        cfg.fill("oscar-tau", &mut self.oscar_tau)?;
        cfg.fill("oscar-index", &mut self.oscar_index)?;
        cfg.fill("lasso", &mut self.lasso)?;
        cfg.fill("weights-file", &mut self.weights_file)
    }
}

impl SolverArgs {
    fn merge(&mut self, cfg: &ConfigFile) -> Result<(), CliError> {
        if self.solver.is_none() {
            if let Some(v) = cfg.entries.get("solver") {
                self.solver = Some(
                    SolverKind::from_str(v, true)
                        .map_err(|_| CliError::input(format!("unknown solver {v:?}")))?,
                );
            }
        }
        if self.screening.is_none() {
            if let Some(v) = cfg.entries.get("screening") {
                self.screening = Some(
                    Switch::from_str(v, true)
                        .map_err(|_| CliError::input(format!("screening must be on or off, got {v:?}")))?,
                );
            }
        }
        cfg.fill("epsilon", &mut self.epsilon)?;
        cfg.fill("max-outer", &mut self.max_outer)?;
        cfg.fill("inner-steps", &mut self.inner_steps)?;
        cfg.fill("batch-size", &mut self.batch_size)?;
        cfg.fill("eta", &mut self.eta)?;
        cfg.fill("solver-seed", &mut self.solver_seed)
    }
}

impl RunArgs {
    /// Fills every unset option from `--config`. Command-line flags win.
    pub fn resolve(mut self, extra_keys: &[&str]) -> Result<(Self, Option<ConfigFile>), CliError> {
        let Some(path) = self.config.clone() else {
            return Ok((self, None));
        };
        let cfg = ConfigFile::load(&path)?;
        let known: Vec<&str> = [DATA_KEYS, WEIGHT_KEYS, SOLVER_KEYS, &["out-dir"], extra_keys].concat();
        cfg.check_known(&known)?;
        self.data.merge(&cfg)?;
        self.weights.merge(&cfg)?;
        self.solver.merge(&cfg)?;
        cfg.fill("out-dir", &mut self.out_dir)?;
        Ok((self, Some(cfg)))
    }
}

impl BenchArgs {
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let (run, cfg) = self.run.resolve(&["trials"])?;
        self.run = run;
        if let Some(cfg) = cfg {
            cfg.fill("trials", &mut self.trials)?;
        }
        Ok(self)
    }
}

impl TraceArgs {
    pub fn resolve(mut self) -> Result<Self, CliError> {
        let (run, cfg) = self.run.resolve(&["out"])?;
        self.run = run;
        if let Some(cfg) = cfg {
            cfg.fill("out", &mut self.out)?;
        }
        Ok(self)
    }
}

impl GenArgs {
    pub fn resolve(mut self) -> Result<Self, CliError> {
        if let Some(path) = &self.config {
            let cfg = ConfigFile::load(path)?;
            cfg.check_known(&[DATA_KEYS, &["out"]].concat())?;
            self.data.merge(&cfg)?;
            cfg.fill("out", &mut self.out)?;
        }
        Ok(self)
    }
}
