use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use owl_screen::{
    generate_synthetic, load_csv, load_libsvm, oscar_weights_from_data, oscar_weights_from_tau,
    solve, DesignMatrix, SolveResult, SolverConfig, SpgdParams, SyntheticSpec, TargetColumn,
    WeightVector,
};
use serde::Serialize;

use crate::args::{
    BenchArgs, DataArgs, GenArgs, RunArgs, SolverArgs, SolverKind, Switch, TraceArgs, WeightArgs,
};
use crate::error::CliError;

const DEFAULT_TRIALS: usize = 5;
const AGREEMENT_TOL: f64 = 1e-6;
const VERIFY_EPSILON: f64 = 1e-10;

fn synthetic_spec(data: &DataArgs) -> SyntheticSpec {
    SyntheticSpec {
        n: data.n.unwrap_or(100),
        d: data.d.unwrap_or(2000),
        k_true: data.k_true.unwrap_or(20),
        group_size: data.group_size.unwrap_or(1),
        noise_sd: data.noise_sd.unwrap_or(0.1),
        seed: data.seed.unwrap_or(0),
    }
}

pub fn load_data(data: &DataArgs) -> Result<DesignMatrix, CliError> {
    let sources = [data.libsvm.is_some(), data.csv.is_some(), data.synthetic];
    let m = match sources.iter().filter(|s| **s).count() {
        0 => return Err(CliError::input("no data: give one of --libsvm, --csv or --synthetic")),
        1 => {
            if let Some(path) = &data.libsvm {
                load_libsvm(path)?
            } else if let Some(path) = &data.csv {
                let target = data
                    .target
                    .clone()
                    .map_or(TargetColumn::Last, TargetColumn::Named);
                load_csv(path, &target)?
            } else {
                generate_synthetic(&synthetic_spec(data))?.0
            }
        }
        _ => return Err(CliError::input("give exactly one of --libsvm, --csv or --synthetic")),
    };
    if data.standardize {
        Ok(m.standardize(true)?)
    } else {
        Ok(m)
    }
}

pub fn build_weights(w: &WeightArgs, m: &DesignMatrix) -> Result<WeightVector, CliError> {
    let kinds = [
        w.oscar_p.is_some(),
        w.oscar_tau.is_some(),
        w.lasso.is_some(),
        w.weights_file.is_some(),
    ];
    match kinds.iter().filter(|k| **k).count() {
        0 => {
            return Err(CliError::input(
                "no weights: give one of --oscar-p, --oscar-tau, --lasso or --weights-file",
            ))
        }
        1 => {}
        _ => return Err(CliError::input("give exactly one weight specification")),
    }
    if w.oscar_index.is_some() && w.oscar_tau.is_none() {
        return Err(CliError::input("--oscar-index needs --oscar-tau"));
    }
    let weights = if let Some(p) = w.oscar_p {
        oscar_weights_from_data(m, p)?
    } else if let Some(tau) = w.oscar_tau {
        oscar_weights_from_tau(m, w.oscar_index.unwrap_or(1), tau)?
    } else if let Some(l) = w.lasso {
        WeightVector::lasso(m.d(), l)?
    } else {
        let path = w.weights_file.as_ref().expect("one kind is set");
        WeightVector::from_file(path)?
    };
    if weights.len() != m.d() {
        return Err(CliError::input(format!(
            "weights file has {} entries but the data has {} features",
            weights.len(),
            m.d()
        )));
    }
    Ok(weights)
}

pub fn build_config(s: &SolverArgs, n: usize) -> Result<SolverConfig, CliError> {
    let screening = s.screening.unwrap_or(Switch::On) == Switch::On;
    let mut spgd = SpgdParams::default().clamped_to(n);
    if let Some(t) = s.inner_steps {
        spgd.inner_steps = t;
    }
    if let Some(l) = s.batch_size {
        spgd.batch_size = l;
    }
    spgd.eta = s.eta;
    let mut cfg = SolverConfig::spgd(screening, spgd);
    if let Some(eps) = s.epsilon {
        cfg = cfg.with_epsilon(eps);
    }
    if let Some(k) = s.max_outer {
        cfg = cfg.with_max_outer(k);
    }
    if let Some(seed) = s.solver_seed {
        cfg = cfg.with_seed(seed);
    }
    // SPGD settings are validated even for apgd so typos surface early
    cfg.validate(n, 0)?;
    if s.solver.unwrap_or(SolverKind::Apgd) == SolverKind::Apgd {
        cfg.mode = owl_screen::Mode::Apgd;
    }
    Ok(cfg)
}

struct Problem {
    matrix: DesignMatrix,
    weights: WeightVector,
    config: SolverConfig,
}

fn prepare(run: &RunArgs) -> Result<Problem, CliError> {
    let matrix = load_data(&run.data)?;
    let weights = build_weights(&run.weights, &matrix)?;
    let config = build_config(&run.solver, matrix.n())?;
    Ok(Problem {
        matrix,
        weights,
        config,
    })
}

fn out_dir(run: &RunArgs) -> Result<PathBuf, CliError> {
    let dir = run.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))
}

fn warn_unconverged(r: &SolveResult, cfg: &SolverConfig) {
    if !r.converged {
        eprintln!(
            "warning: stopped after {} outer iterations with gap {:.3e} > epsilon {:.1e}",
            r.iterations, r.certificate.gap, cfg.epsilon
        );
    }
}

pub fn cmd_solve(run: RunArgs) -> Result<(), CliError> {
    let (run, _) = run.resolve(&[])?;
    let p = prepare(&run)?;
    let dir = out_dir(&run)?;
    let r = solve(&p.matrix, &p.weights, &p.config)?;
    warn_unconverged(&r, &p.config);

    let record = r.to_record(&p.config);
    let mut out = create(&dir.join("result.json"))?;
    serde_json::to_writer_pretty(&mut out, &record).context("writing result.json")?;
    writeln!(out).and_then(|_| out.flush()).context("writing result.json")?;
    let mut trace = create(&dir.join("trace.csv"))?;
    r.trace.write_csv(&mut trace)?;
    trace.flush().context("writing trace.csv")?;

    println!("gap: {:.6e}", r.certificate.gap);
    println!("nonzeros: {}", record.beta_nonzeros.len());
    println!("iterations: {}", r.iterations);
    println!("wall time: {:.3} ms", record.wall_ms);
    Ok(())
}

pub fn cmd_trace(args: TraceArgs) -> Result<(), CliError> {
    let args = args.resolve()?;
    if args.run.solver.screening == Some(Switch::Off) {
        return Err(CliError::input("trace needs screening; drop --screening off"));
    }
    let p = prepare(&args.run)?;
    let r = solve(&p.matrix, &p.weights, &p.config)?;
    warn_unconverged(&r, &p.config);
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            r.trace.write_csv(&mut w)?;
            w.flush().context("writing trace")?;
        }
        None => {
            let stdout = std::io::stdout();
            r.trace.write_csv(stdout.lock())?;
        }
    }
    Ok(())
}

pub fn cmd_gen(args: GenArgs) -> Result<(), CliError> {
    let args = args.resolve()?;
    let spec = synthetic_spec(&args.data);
    let (m, beta) = generate_synthetic(&spec)?;
    let path = args
        .out
        .clone()
        .ok_or_else(|| CliError::input("gen needs --out PATH"))?;
    let mut out = create(&path)?;
    m.write_libsvm(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::input(format!("cannot write {}: {e}", path.display())))?;

    let sidecar = sidecar_path(&path);
    let mut side = create(&sidecar)?;
    for b in &beta {
        writeln!(side, "{b}").map_err(|e| CliError::input(format!("cannot write {}: {e}", sidecar.display())))?;
    }
    side.flush().context("writing true_beta")?;
    println!("wrote {} ({} x {}) and {}", path.display(), m.n(), m.d(), sidecar.display());
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".true_beta");
    PathBuf::from(s)
}

#[derive(Debug, Serialize)]
struct BenchRow {
    variant: String,
    trials: usize,
    mean_ms: f64,
    stddev_ms: f64,
    median_ms: f64,
    pct_of_apgd: f64,
    iterations: usize,
    final_gap: f64,
    converged: bool,
}

fn summarize(times: &[f64]) -> (f64, f64, f64) {
    let n = times.len() as f64;
    let mean = times.iter().sum::<f64>() / n;
    let var = if times.len() > 1 {
        times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len().is_multiple_of(2) {
        0.5 * (sorted[mid - 1] + sorted[mid])
    } else {
        sorted[mid]
    };
    (mean, var.sqrt(), median)
}

pub fn cmd_bench(args: BenchArgs) -> Result<(), CliError> {
    let args = args.resolve()?;
    let trials = args.trials.unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(CliError::input("trials must be at least 1"));
    }
    let p = prepare(&args.run)?;
    let dir = out_dir(&args.run)?;

    let base = p.config.clone();
    let variants = [
        ("apgd", SolverConfig { mode: owl_screen::Mode::Apgd, screening: false, ..base.clone() }),
        ("apgd+screen", SolverConfig { mode: owl_screen::Mode::Apgd, screening: true, ..base.clone() }),
        ("spgd", SolverConfig { mode: owl_screen::Mode::Spgd, screening: false, ..base.clone() }),
        ("spgd+screen", SolverConfig { mode: owl_screen::Mode::Spgd, screening: true, ..base }),
    ];

    let mut rows = Vec::new();
    for (name, cfg) in &variants {
        let mut times = Vec::with_capacity(trials);
        let mut last = None;
        for _ in 0..trials {
            let r = solve(&p.matrix, &p.weights, cfg)?;
            times.push(r.wall_time.as_secs_f64() * 1e3);
            last = Some(r);
        }
        let r = last.expect("at least one trial");
        if !r.converged {
            return Err(CliError::runtime(format!(
                "{name} did not converge in {} outer iterations (gap {:.3e}); raise --max-outer or tune the solver",
                r.iterations, r.certificate.gap
            )));
        }
        let (mean, sd, median) = summarize(&times);
        rows.push(BenchRow {
            variant: name.to_string(),
            trials,
            mean_ms: mean,
            stddev_ms: sd,
            median_ms: median,
            pct_of_apgd: 0.0,
            iterations: r.iterations,
            final_gap: r.certificate.gap,
            converged: r.converged,
        });
    }

    // Timed runs stop at the user's epsilon, where two correct solvers may
    // differ by more than the agreement tolerance. The check therefore uses
    // untimed cold-start solves of every variant at a tight gap.
    let mut betas = Vec::with_capacity(variants.len());
    for (name, cfg) in &variants {
        let cfg = SolverConfig {
            epsilon: cfg.epsilon.min(VERIFY_EPSILON),
            max_outer: Some(cfg.effective_max_outer() * 10),
            ..cfg.clone()
        };
        let r = solve(&p.matrix, &p.weights, &cfg)?;
        if !r.converged {
            return Err(CliError::runtime(format!(
                "{name}: verification solve did not reach gap {:.0e} (gap {:.3e}); cannot check agreement",
                cfg.epsilon, r.certificate.gap
            )));
        }
        betas.push(r.beta);
    }
    if args.inject_disagreement {
        if let Some(b) = betas[1].first_mut() {
            *b += 1.0;
        }
    }
    for (k, beta) in betas.iter().enumerate().skip(1) {
        let diff = beta
            .iter()
            .zip(&betas[0])
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if diff > AGREEMENT_TOL {
            return Err(CliError::safety(format!(
                "safety check failed: {} differs from apgd by {diff:.3e} (> {AGREEMENT_TOL:e}); no timings reported",
                rows[k].variant
            )));
        }
    }

    let apgd_mean = rows[0].mean_ms;
    for row in &mut rows {
        row.pct_of_apgd = row.mean_ms / apgd_mean * 100.0;
    }
    let path = dir.join("bench.csv");
    let mut w = csv::Writer::from_writer(create(&path)?);
    for row in &rows {
        w.serialize(row).context("writing bench.csv")?;
    }
    w.flush().context("writing bench.csv")?;

    println!("{:<12} {:>12} {:>10} {:>12} {:>9}", "variant", "mean ms", "sd ms", "median ms", "% apgd");
    for row in &rows {
        println!(
            "{:<12} {:>12.2} {:>10.2} {:>12.2} {:>8.1}%",
            row.variant, row.mean_ms, row.stddev_ms, row.median_ms, row.pct_of_apgd
        );
    }
    Ok(())
}
