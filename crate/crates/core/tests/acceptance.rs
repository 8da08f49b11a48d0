//! Acceptance suite. Runs every criterion in sequence (timings must not
//! overlap), prints one PASS/FAIL line per criterion and exits nonzero if
//! any failed.

use std::path::Path;
use std::time::Instant;

use owl_screen::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Outcome of a screened run, collected for criterion 9.
struct ScreenedRun {
    label: String,
    converged: bool,
    full_gap: f64,
}

#[derive(Default)]
struct Suite {
    screened: Vec<ScreenedRun>,
}

impl Suite {
    fn record(&mut self, label: String, m: &DesignMatrix, w: &WeightVector, r: &SolveResult) {
        let full_gap = gap_certificate(m, &r.beta, w).unwrap().gap;
        self.screened.push(ScreenedRun {
            label,
            converged: r.converged,
            full_gap,
        });
    }
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn synthetic(n: usize, d: usize, k: usize, seed: u64) -> DesignMatrix {
    let spec = SyntheticSpec {
        n,
        d,
        k_true: k,
        group_size: 1,
        noise_sd: 0.1,
        seed,
    };
    generate_synthetic(&spec).unwrap().0.standardize(true).unwrap()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn owl_oracle(x: &[f64], lambda: &[f64]) -> f64 {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags.iter().zip(lambda).map(|(a, l)| a * l).sum()
}

fn prox_objective(x: &[f64], v: &[f64], lambda: &[f64]) -> f64 {
    let quad: f64 = x.iter().zip(v).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
    quad + owl_oracle(x, lambda)
}

fn random_weights(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let mut l: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..2.0)).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l[0] += 1e-3;
    l
}

/// Candidates built from every split of the magnitude order into contiguous
/// blocks, each block set to its pooled value, plus a grid around it.
fn pooled_candidates(v: &[f64], lambda: &[f64], mut visit: impl FnMut(&[f64])) {
    let d = v.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| v[b].abs().total_cmp(&v[a].abs()));
    let mut x = vec![0.0; d];
    for mask in 0..(1u32 << (d - 1)) {
        let mut blocks = Vec::new();
        let mut start = 0;
        for k in 0..d {
            if k == d - 1 || mask & (1 << k) != 0 {
                blocks.push((start, k + 1));
                start = k + 1;
            }
        }
        let values: Vec<f64> = blocks
            .iter()
            .map(|&(s, e)| {
                let len = (e - s) as f64;
                let mv = order[s..e].iter().map(|&i| v[i].abs()).sum::<f64>() / len;
                let ml = lambda[s..e].iter().sum::<f64>() / len;
                (mv - ml).max(0.0)
            })
            .collect();
        for g in -3..=3 {
            let factor = 1.0 + g as f64 * 1e-3;
            for (&(s, e), c) in blocks.iter().zip(&values) {
                for &i in &order[s..e] {
                    x[i] = v[i].signum() * c * factor;
                }
            }
            visit(&x);
        }
    }
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let d = rng.random_range(1..=8);
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let lambda = random_weights(&mut rng, d);
        let w = WeightVector::custom(lambda.clone()).unwrap();
        let prox = prox_owl(&v, &w, 1.0).unwrap();
        let f_prox = prox_objective(&prox, &v, &lambda);

        let scale = v.iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1e-3);
        let mut best = f64::INFINITY;
        let mut cand = vec![0.0; d];
        for c in 0..10_000 {
            if c % 2 == 0 {
                for x in cand.iter_mut() {
                    *x = rng.random_range(-scale..scale);
                }
            } else {
                let r = scale * 10f64.powf(rng.random_range(-6.0..0.0));
                for (x, p) in cand.iter_mut().zip(&prox) {
                    *x = p + rng.random_range(-r..r);
                }
            }
            best = best.min(prox_objective(&cand, &v, &lambda));
        }
        pooled_candidates(&v, &lambda, |x| best = best.min(prox_objective(x, &v, &lambda)));
        worst = worst.max(f_prox - best);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        worst <= 1e-8 && secs < 10.0,
        format!("max F(prox) - best candidate = {worst:.2e} over 1000 instances, {secs:.2} s"),
    )
}

/// ISTA with elementwise soft-thresholding and the exact spectral step.
fn ista_reference(m: &DesignMatrix, lambda0: f64) -> Vec<f64> {
    let x = nalgebra::DMatrix::from_column_slice(m.n(), m.d(), m.values());
    let y = nalgebra::DVector::from_column_slice(m.y());
    let sigma = x.singular_values().max();
    let step = 1.0 / (sigma * sigma);
    let mut beta = nalgebra::DVector::zeros(m.d());
    for _ in 0..200_000 {
        let grad = x.transpose() * (&x * &beta - &y);
        let z = &beta - step * grad;
        let next = z.map(|v: f64| v.signum() * (v.abs() - step * lambda0).max(0.0));
        let change = (&next - &beta).amax();
        beta = next;
        if change <= 1e-15 {
            break;
        }
    }
    beta.as_slice().to_vec()
}

fn criterion_2(suite: &mut Suite) -> Verdict {
    // exact soft-thresholding on dyadic inputs
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bitwise = true;
    for _ in 0..500 {
        let d = rng.random_range(1..=12);
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-64i32..=64) as f64 / 8.0).collect();
        let lam = rng.random_range(1i32..=48) as f64 / 16.0;
        let w = WeightVector::lasso(d, lam).unwrap();
        let prox = prox_owl(&v, &w, 1.0).unwrap();
        let soft: Vec<f64> = v.iter().map(|x| x.signum() * (x.abs() - lam).max(0.0)).collect();
        bitwise &= prox.iter().zip(&soft).all(|(a, b)| a.to_bits() == b.to_bits() || (*a == 0.0 && *b == 0.0));
    }

    let mut worst = 0.0_f64;
    for seed in 0..20 {
        let m = synthetic(60, 25, 5, 200 + seed);
        let lambda0 = 0.1 * m.tmatvec(m.y()).iter().fold(0.0_f64, |a, c| a.max(c.abs()));
        let w = WeightVector::lasso(25, lambda0).unwrap();
        let cfg = SolverConfig::apgd(true).with_epsilon(1e-12);
        let r = solve(&m, &w, &cfg).unwrap();
        suite.record(format!("lasso seed {seed}"), &m, &w, &r);
        worst = worst.max(max_diff(&r.beta, &ista_reference(&m, lambda0)));
    }
    verdict(
        bitwise && worst <= 1e-6,
        format!("soft-threshold bitwise: {bitwise}; max |apgd - ista| = {worst:.2e} over 20 instances"),
    )
}

fn load_public(name: &str) -> DesignMatrix {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name);
    let raw = load_csv(path, &TargetColumn::Named("target".into())).unwrap();
    let m = raw.standardize(true).unwrap();
    // unit-variance response keeps the objective O(n), so a 1e-10 gap is
    // above rounding noise
    let sd = (m.y().iter().map(|v| v * v).sum::<f64>() / m.n() as f64).sqrt();
    let y: Vec<f64> = m.y().iter().map(|v| v / sd).collect();
    DesignMatrix::new(m.n(), m.d(), m.values().to_vec(), y).unwrap()
}

const SAFETY_EPS: f64 = 1e-12;

fn tight(screening: bool) -> SolverConfig {
    SolverConfig::apgd(screening)
        .with_epsilon(SAFETY_EPS)
        .with_max_outer(200_000)
}

fn rmse_diff(m: &DesignMatrix, a: &[f64], b: &[f64]) -> f64 {
    (rmse(&m.matvec(a), m.y()).unwrap() - rmse(&m.matvec(b), m.y()).unwrap()).abs()
}

/// Two unscreened cold starts (from zero and from a random point) that agree
/// to the comparison tolerances. Returns the first, or `None` when the
/// optimum is not reproducible at that precision.
fn stable_reference(m: &DesignMatrix, w: &WeightVector, seed: u64) -> Option<SolveResult> {
    let a = solve(m, w, &tight(false)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start: Vec<f64> = (0..m.d()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let cfg = SolverConfig {
        warm_start_beta: Some(start),
        ..tight(false)
    };
    let b = solve(m, w, &cfg).unwrap();
    let agree = a.converged
        && b.converged
        && max_diff(&a.beta, &b.beta) <= 1e-6
        && rmse_diff(m, &a.beta, &b.beta) <= 1e-10;
    agree.then_some(a)
}

fn criterion_3(suite: &mut Suite) -> Verdict {
    let mut cases: Vec<(String, DesignMatrix, WeightVector, SolveResult)> = Vec::new();
    let mut unstable = Vec::new();
    let mut failures = Vec::new();
    for (name, p) in [("diabetes", 0.05), ("breast_cancer", 0.02)] {
        let m = load_public(&format!("{name}.csv"));
        let w = oscar_weights_from_data(&m, p).unwrap();
        match stable_reference(&m, &w, 0) {
            Some(r) => cases.push((name.into(), m, w, r)),
            None => failures.push(format!("{name}: cold starts disagree")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut seed = 0;
    while cases.len() < 52 && seed < 200 {
        let n = rng.random_range(50..=200);
        let d = rng.random_range(20..=500);
        let k = rng.random_range(1..=10.min(d));
        let p = rng.random_range(0.05..0.4);
        let m = synthetic(n, d, k, 300 + seed);
        let w = oscar_weights_from_data(&m, p).unwrap();
        match stable_reference(&m, &w, seed) {
            Some(r) => cases.push((format!("synthetic seed {seed} ({n}x{d})"), m, w, r)),
            None => unstable.push(seed),
        }
        seed += 1;
    }
    if cases.len() < 52 {
        failures.push(format!("only {} stable problems", cases.len()));
    }

    let mut worst_beta = 0.0_f64;
    let mut worst_rmse = 0.0_f64;
    let mut worst_screened = 0.0_f64;
    for (label, m, w, reference) in &cases {
        let screened = solve(m, w, &tight(true)).unwrap();
        suite.record(format!("safety {label}"), m, w, &screened);
        if reference.certificate.gap > 1e-10 {
            failures.push(format!("{label}: reference gap {:.1e}", reference.certificate.gap));
        }
        let db = max_diff(&reference.beta, &screened.beta);
        let rm = rmse_diff(m, &reference.beta, &screened.beta);
        let alive = screened.final_active.indices();
        let zs = (0..m.d())
            .filter(|j| alive.binary_search(j).is_err())
            .map(|j| reference.beta[j].abs())
            .fold(0.0, f64::max);
        if db > 1e-6 || rm > 1e-10 || zs > 1e-9 {
            failures.push(format!("{label}: beta {db:.1e}, rmse {rm:.1e}, screened {zs:.1e}"));
        }
        worst_beta = worst_beta.max(db);
        worst_rmse = worst_rmse.max(rm);
        worst_screened = worst_screened.max(zs);
    }
    verdict(
        failures.is_empty(),
        format!(
            "{} problems at eps {SAFETY_EPS:.0e} ({} synthetic candidates skipped: cold starts disagree): \
             max |beta diff| = {worst_beta:.1e}, max rmse diff = {worst_rmse:.1e}, \
             max |beta*_i| on screened = {worst_screened:.1e}{}",
            cases.len(),
            unstable.len(),
            if failures.is_empty() { String::new() } else { format!("; failing: {}", failures.join(", ")) }
        ),
    )
}

/// Strict-gap check: at the (tightly solved) optimum every zero coefficient
/// clears its threshold by more than the screening radius at the stopping
/// gap, counted twice (once for `θ`'s distance to `θ⋆`, once for the test's
/// own ball). Screening at a zero-radius-equivalent of that margin must
/// remove exactly the zero set.
const STRICT_GAP_FACTOR: f64 = 1.0;

fn strict_gap(m: &DesignMatrix, w: &WeightVector) -> bool {
    let reference = solve(m, w, &SolverConfig::apgd(false).with_epsilon(1e-12)).unwrap();
    let theta = m.residual(&reference.beta);
    let corr: Vec<f64> = m.tmatvec(&theta).iter().map(|c| c.abs()).collect();
    // radius 2√(2G) with G = STRICT_GAP_FACTOR · ε is √(2 · 4G)
    let margin_gap = 4.0 * STRICT_GAP_FACTOR * 1e-6;
    let kept = screen_iterative(&ActiveSet::full(m.d()), &corr, m.col_norms(), margin_gap, w).unwrap();
    let support: Vec<usize> = (0..m.d()).filter(|&j| reference.beta[j] != 0.0).collect();
    kept.indices() == support.as_slice()
}

fn criterion_4(suite: &mut Suite) -> Verdict {
    let mut rates = Vec::new();
    let mut skipped = 0;
    let mut seed = 400;
    let mut instances = 0;
    while instances < 10 {
        let spec = SyntheticSpec {
            n: 100,
            d: 2000,
            k_true: 20,
            group_size: 1,
            noise_sd: 0.1,
            seed,
        };
        seed += 1;
        let m = generate_synthetic(&spec).unwrap().0.standardize(true).unwrap();
        let w = oscar_weights_from_data(&m, 0.2).unwrap();
        if !strict_gap(&m, &w) {
            skipped += 1;
            continue;
        }
        let r = solve(&m, &w, &SolverConfig::apgd(true)).unwrap();
        suite.record(format!("completeness seed {}", seed - 1), &m, &w, &r);
        let spgd_cfg = SolverConfig::spgd(true, SpgdParams::default()).with_seed(seed);
        let s = solve(&m, &w, &spgd_cfg).unwrap();
        suite.record(format!("completeness spgd seed {}", seed - 1), &m, &w, &s);
        instances += 1;
        for run in [&r, &s] {
            rates.push(run.trace.rows.last().map_or(0.0, |row| row.screen_rate));
        }
    }
    let all_full = rates.iter().all(|r| *r == 1.0);
    let lowest = rates.iter().cloned().fold(f64::INFINITY, f64::min);
    verdict(
        all_full,
        format!(
            "{} runs (apgd and spgd) on 10 strict-gap instances ({skipped} candidates failed verification): lowest final screening rate {lowest:.4}",
            rates.len()
        ),
    )
}

fn criterion_5(suite: &mut Suite) -> Verdict {
    let start = Instant::now();
    let m = synthetic(100, 10_000, 20, 500);
    let w = oscar_weights_from_data(&m, 0.15).unwrap();
    let eta = 1.0 / (STEP_INFLATION * lipschitz_estimate(&m).unwrap());
    let params = SpgdParams {
        inner_steps: 20,
        batch_size: 50,
        eta: Some(eta),
    };
    let configs = [
        ("apgd", SolverConfig::apgd(false)),
        ("apgd+screen", SolverConfig::apgd(true)),
        ("spgd", SolverConfig::spgd(false, params.clone()).with_seed(5)),
        ("spgd+screen", SolverConfig::spgd(true, params).with_seed(5)),
    ];
    let mut times = Vec::new();
    let mut betas = Vec::new();
    let mut converged = true;
    for (name, cfg) in &configs {
        let r = solve(&m, &w, cfg).unwrap();
        converged &= r.converged;
        if cfg.screening {
            suite.record(format!("speedup {name}"), &m, &w, &r);
        }
        times.push(r.wall_time.as_secs_f64());
        betas.push(r.beta);
    }
    let support = betas[0].iter().filter(|b| **b != 0.0).count();
    let apgd_ratio = times[1] / times[0];
    let spgd_ratio = times[3] / times[2];
    let total = start.elapsed().as_secs_f64();
    verdict(
        converged && apgd_ratio <= 0.5 && spgd_ratio <= 0.5 && total < 300.0,
        format!(
            "|A*| = {support}; apgd {:.2}s -> {:.2}s ({:.1}%), spgd {:.2}s -> {:.2}s ({:.1}%), all converged: {converged}, total {total:.0}s",
            times[0],
            times[1],
            100.0 * apgd_ratio,
            times[2],
            times[3],
            100.0 * spgd_ratio
        ),
    )
}

/// `θ⋆ = Xβ⋆ − y` to rounding precision: solve tightly, read off the
/// support, signs and tied clusters, then solve the least-squares problem
/// on that structure in closed form.
fn exact_dual_optimum(m: &DesignMatrix, w: &WeightVector) -> Vec<f64> {
    let approx = solve(m, w, &SolverConfig::apgd(false).with_epsilon(1e-13)).unwrap();
    let beta = &approx.beta;
    let mut order: Vec<usize> = (0..m.d()).filter(|&j| beta[j].abs() > 1e-9).collect();
    order.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()));
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for &j in &order {
        match clusters.last_mut() {
            Some(c) if (beta[c[0]].abs() - beta[j].abs()).abs() <= 1e-6 => c.push(j),
            _ => clusters.push(vec![j]),
        }
    }
    if clusters.is_empty() {
        return m.residual(beta);
    }
    let lambda = w.as_slice();
    let mut rank = 0;
    let mut z = nalgebra::DMatrix::zeros(m.n(), clusters.len());
    let mut rhs_shift = nalgebra::DVector::zeros(clusters.len());
    for (g, c) in clusters.iter().enumerate() {
        for &j in c {
            let s = beta[j].signum();
            for i in 0..m.n() {
                z[(i, g)] += s * m.get(i, j);
            }
            rhs_shift[g] += lambda[rank];
            rank += 1;
        }
    }
    let y = nalgebra::DVector::from_column_slice(m.y());
    let rhs = z.transpose() * &y - rhs_shift;
    let polished = (z.transpose() * &z).lu().solve(&rhs).map(|c| {
        let mut b = vec![0.0; m.d()];
        for (g, cl) in clusters.iter().enumerate() {
            for &j in cl {
                b[j] = beta[j].signum() * c[g];
            }
        }
        b
    });
    match polished {
        Some(b) if gap_certificate(m, &b, w).unwrap().gap <= approx.certificate.gap => m.residual(&b),
        _ => m.residual(beta),
    }
}

fn criterion_6(suite: &mut Suite) -> Verdict {
    let mut worst_gap = f64::INFINITY;
    let mut worst_feas = 0.0_f64;
    let mut worst_ball = f64::NEG_INFINITY;
    let mut events = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for seed in 0..30 {
        let small = seed < 15;
        let (n, d) = if small {
            (rng.random_range(3..=20), rng.random_range(1..=6))
        } else {
            (rng.random_range(30..=80), rng.random_range(50..=300))
        };
        let m = synthetic(n, d, 1 + d / 10, 600 + seed);
        let w = oscar_weights_from_data(&m, rng.random_range(0.05..0.5)).unwrap();
        let theta_star = small.then(|| exact_dual_optimum(&m, &w));
        let spgd = SpgdParams::default().clamped_to(n);
        for cfg in [
            SolverConfig::apgd(true),
            SolverConfig::apgd(false),
            SolverConfig::spgd(true, spgd.clone()).with_seed(seed),
        ] {
            let r = solve_observed(&m, &w, &cfg, |ev| {
                events += 1;
                let cert = ev.certificate;
                worst_gap = worst_gap.min(cert.gap);
                // the certificate belongs to the restricted problem
                let sub = m.select_columns(ev.active.indices());
                let sw = w.truncated(ev.active.len()).unwrap();
                let feas = dual_norm(&sub.tmatvec(&cert.theta), &sw).unwrap();
                worst_feas = worst_feas.max(feas - 1.0);
                if let Some(ts) = &theta_star {
                    let dist = cert.theta.iter().zip(ts).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    worst_ball = worst_ball.max(dist - cert.safe_radius());
                }
            })
            .unwrap();
            // final certificates are for the full problem
            let full = &r.certificate;
            worst_gap = worst_gap.min(full.gap);
            worst_feas = worst_feas.max(dual_norm(&m.tmatvec(&full.theta), &w).unwrap() - 1.0);
            if cfg.screening {
                suite.record(format!("certificates seed {seed} {}", cfg.mode), &m, &w, &r);
            }
        }
    }
    verdict(
        worst_gap >= -1e-10 && worst_feas <= 1e-10 && worst_ball <= 1e-8,
        format!(
            "{events} certificates: min gap {worst_gap:.1e}, max dual norm - 1 = {worst_feas:.1e}, \
             max ||theta - theta*|| - sqrt(2G) = {worst_ball:.1e} (d <= 6)"
        ),
    )
}

fn criterion_7(suite: &mut Suite) -> Verdict {
    let mut worst = 0.0_f64;
    let mut nonzero_groups = 0;
    for seed in 0..10 {
        let base = synthetic(50, 40, 4, 700 + seed);
        // columns 0..4 each copied twice into 4..8 and 8..12
        let n = base.n();
        let mut values = base.values().to_vec();
        for g in 0..4 {
            let col = base.col(g).to_vec();
            values[(4 + g) * n..(5 + g) * n].copy_from_slice(&col);
            values[(8 + g) * n..(9 + g) * n].copy_from_slice(&col);
        }
        let m = DesignMatrix::new(n, 40, values, base.y().to_vec()).unwrap();
        let w = oscar_weights_from_data(&m, 0.05).unwrap();
        for cfg in [
            SolverConfig::apgd(true),
            SolverConfig::spgd(true, SpgdParams::default()).with_seed(seed),
        ] {
            let r = solve(&m, &w, &cfg).unwrap();
            suite.record(format!("grouping seed {seed} {}", cfg.mode), &m, &w, &r);
            for g in 0..4 {
                let vals = [r.beta[g], r.beta[4 + g], r.beta[8 + g]];
                let hi = vals.iter().cloned().fold(f64::MIN, f64::max);
                let lo = vals.iter().cloned().fold(f64::MAX, f64::min);
                worst = worst.max(hi - lo);
                nonzero_groups += usize::from(hi != 0.0 || lo != 0.0);
            }
        }
    }
    verdict(
        worst <= 1e-6,
        format!("max within-group spread {worst:.1e} over 80 groups ({nonzero_groups} nonzero)"),
    )
}

fn criterion_8(suite: &mut Suite) -> Verdict {
    let mut worst = 0.0_f64;
    let mut converged = true;
    for seed in 0..10 {
        let m = synthetic(200, 60, 6, 800 + seed);
        let w = oscar_weights_from_data(&m, 0.1).unwrap();
        let reference = solve(&m, &w, &SolverConfig::apgd(false).with_epsilon(1e-12)).unwrap();
        let params = SpgdParams {
            inner_steps: 20,
            batch_size: 50,
            eta: Some(1.0 / (STEP_INFLATION * lipschitz_estimate(&m).unwrap())),
        };
        let cfg = SolverConfig::spgd(true, params).with_epsilon(1e-9).with_seed(seed);
        let r = solve(&m, &w, &cfg).unwrap();
        suite.record(format!("cross-solver seed {seed}"), &m, &w, &r);
        converged &= r.converged;
        worst = worst.max(max_diff(&r.beta, &reference.beta));
    }
    verdict(
        converged && worst <= 1e-4,
        format!("max |spgd - apgd| = {worst:.1e} over 10 instances (200x60), all converged: {converged}"),
    )
}

fn criterion_9(suite: &Suite) -> Verdict {
    let bad: Vec<&ScreenedRun> = suite
        .screened
        .iter()
        .filter(|r| !r.converged || r.full_gap > 1e-6)
        .collect();
    let worst = suite.screened.iter().map(|r| r.full_gap).fold(f64::NEG_INFINITY, f64::max);
    let names: Vec<&str> = bad.iter().map(|r| r.label.as_str()).collect();
    verdict(
        bad.is_empty(),
        format!(
            "{} screened runs, max full-problem gap {worst:.1e}{}",
            suite.screened.len(),
            if names.is_empty() { String::new() } else { format!("; failing: {}", names.join(", ")) }
        ),
    )
}

fn main() {
    let mut suite = Suite::default();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    // ACCEPTANCE_ONLY=3,6 runs a subset
    let only: Option<Vec<u32>> = std::env::var("ACCEPTANCE_ONLY")
        .ok()
        .map(|v| v.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut(&mut Suite) -> Verdict| {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            return;
        }
        let t = Instant::now();
        let v = f(&mut suite);
        println!(
            "{} criterion {id} ({name}): {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            t.elapsed().as_secs_f64()
        );
        results.push((id, name, v));
    };
    run(1, "prox oracle", &mut |_| criterion_1());
    run(2, "lasso degeneration", &mut criterion_2);
    run(3, "safety", &mut criterion_3);
    run(4, "screening completeness", &mut criterion_4);
    run(5, "speedup", &mut criterion_5);
    run(6, "certificate soundness", &mut criterion_6);
    run(7, "grouping", &mut criterion_7);
    run(8, "cross-solver agreement", &mut criterion_8);
    run(9, "convergence", &mut |s| criterion_9(s));

    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
