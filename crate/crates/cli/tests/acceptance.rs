//! One line per acceptance criterion. Run with `cargo test -p l1lab-cli --test acceptance`.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use l1lab::decomp::{laakso_snowflake_lowerbound, snowflake_embed, SnowflakeParams};
use l1lab::graph::{laakso, shortest_path_metric};
use l1lab::lower::short_diagonal_relative;
use l1lab::numerics::{integrate_positive_axis, ks_distance};
use l1lab::seed::{derive_seed, rng};
use l1lab::stable::{calibrate_c, ratio_cdf_p1, sample_ratios};
use l1lab_cli::experiment::{
    run_cube, run_laakso, run_snowflake, run_thm1, run_walsh, CubeConfig, ExperimentResult, LaaksoConfig,
    SnowflakeConfig, SnowflakeMetric, Thm1Config, WalshConfig,
};
use rand::Rng;
use rand_distr::StandardNormal;

const SEED: u64 = 20_240_601;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> anyhow::Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn short(x: f64) -> String {
    if x != 0.0 && x.abs() < 1e-3 {
        format!("{x:.3e}")
    } else {
        format!("{x:.6}")
    }
}

fn verdict_summary(r: &ExperimentResult) -> String {
    r.verdicts
        .iter()
        .map(|v| format!("{}={} {} {}", v.name, short(v.value), v.comparison, v.threshold))
        .collect::<Vec<_>>()
        .join("; ")
}

fn from_experiment(r: anyhow::Result<ExperimentResult>) -> anyhow::Result<Outcome> {
    let r = r?;
    outcome(r.passed, verdict_summary(&r))
}

/// KS distance < 0.02 between 1e5 ratios (p = 1, J = 1e4, calibrated C) and the quadrature CDF.
fn ratio_law() -> anyhow::Result<Outcome> {
    let cal = calibrate_c(1.0, 10_000, 20_000, derive_seed(SEED, 10))?;
    let sorted = sample_ratios(1.0, &[1.0], 10_000, cal.c, 100_000, derive_seed(SEED, 11))?.sorted();
    let cdf: Vec<f64> = sorted.iter().map(|&x| ratio_cdf_p1(x)).collect();
    let ks = ks_distance(&cdf);
    outcome(ks < 0.02, format!("C={:.5} KS={ks:.5} < 0.02", cal.c))
}

/// |mean(e^{-aX^2}) - e^{-sqrt a}| < 0.005 at 1e6 fresh samples, a in {0.25, 1, 4}.
fn laplace_identity() -> anyhow::Result<Outcome> {
    let j = 1_000;
    let cal = calibrate_c(1.0, j, 20_000, derive_seed(SEED, 20))?;
    let xs = sample_ratios(1.0, &[1.0], j, cal.c, 1_000_000, derive_seed(SEED, 21))?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for a in [0.25, 1.0, 4.0] {
        let err = (xs.mean_of(|x| (-a * x * x).exp()) - (-f64::sqrt(a)).exp()).abs();
        parts.push(format!("a={a}: {err:.2e}"));
        worst = worst.max(err);
    }
    outcome(worst < 0.005, format!("J={j} {} (max < 0.005)", parts.join(", ")))
}

fn theorem1() -> anyhow::Result<Outcome> {
    from_experiment(run_thm1(&Thm1Config::default(), derive_seed(SEED, 30)))
}

/// 2 E X^{1/2} by quadrature < 10; Monte Carlo E X^{1/2} within 5% of quadrature.
fn moment() -> anyhow::Result<Outcome> {
    let quad = integrate_positive_axis(|x| 2.0 / PI.sqrt() * x.powf(-1.5) * (-1.0 / (4.0 * x * x)).exp(), 1e-12);
    let cal = calibrate_c(1.0, 10_000, 20_000, derive_seed(SEED, 40))?;
    let mc = sample_ratios(1.0, &[1.0], 10_000, cal.c, 100_000, derive_seed(SEED, 41))?.mean_of(f64::sqrt);
    let rel = (mc - quad / 2.0).abs() / (quad / 2.0);
    outcome(quad < 10.0 && rel < 0.05, format!("quadrature={quad:.6} < 10, MC={mc:.5} rel err {rel:.4} < 0.05"))
}

fn walsh() -> anyhow::Result<Outcome> {
    from_experiment(run_walsh(&WalshConfig::default(), derive_seed(SEED, 50)))
}

/// Min relative residual >= -1e-12 over 1e5 random quadruples per p.
fn short_diagonal() -> anyhow::Result<Outcome> {
    let mut r = rng(derive_seed(SEED, 60));
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for p in [1.25, 1.5, 2.0] {
        let mut min = f64::INFINITY;
        for _ in 0..100_000 {
            let d = r.random_range(1..=6);
            let mut pt = || (0..d).map(|_| r.sample::<f64, _>(StandardNormal)).collect::<Vec<f64>>();
            let (u, v, a, b) = (pt(), pt(), pt(), pt());
            min = min.min(short_diagonal_relative(&u, &v, &a, &b, p)?);
        }
        parts.push(format!("p={p}: {min:.3e}"));
        worst = worst.min(min);
    }
    outcome(worst >= -1e-12, format!("{} (min >= -1e-12)", parts.join(", ")))
}

fn laakso_checks() -> anyhow::Result<Outcome> {
    from_experiment(run_laakso(&LaaksoConfig::default(), derive_seed(SEED, 70)))
}

/// Envelope and contraction on path64 and Laakso G_2, band <= 3 on both.
fn snowflake() -> anyhow::Result<Outcome> {
    let path = SnowflakeConfig { metric: SnowflakeMetric::Path, path_n: 64, ..Default::default() };
    let g2 = SnowflakeConfig { metric: SnowflakeMetric::Laakso, max_level: 2, ..Default::default() };
    let a = run_snowflake(&path, derive_seed(SEED, 80))?;
    let b = run_snowflake(&g2, derive_seed(SEED, 81))?;
    outcome(
        a.passed && b.passed,
        format!("path64 [{}] | laakso G2 [{}]", verdict_summary(&a), verdict_summary(&b)),
    )
}

/// Exact recursion at eps = 0 for i <= 8; measured distortion of G_i >= lower bound.
fn tightness() -> anyhow::Result<Outcome> {
    let mut exact = true;
    for i in 0..=8u32 {
        exact &= laakso_snowflake_lowerbound(i, 0.0)? == (1.0 + i as f64 / 4.0).sqrt();
    }
    let mut min_excess = f64::INFINITY;
    for i in 1..=3u32 {
        let m = shortest_path_metric(&laakso(i)?)?;
        for (r, eps) in [0.5, 0.25, 0.125].into_iter().enumerate() {
            let s = snowflake_embed(&m, eps, &SnowflakeParams::default(), derive_seed(SEED, 90 + 3 * i as u64 + r as u64))?;
            min_excess = min_excess.min(s.report.distortion - laakso_snowflake_lowerbound(i, eps)?);
        }
    }
    outcome(
        exact && min_excess >= 0.0,
        format!("recursion exact for i<=8: {exact}; min distortion - bound = {min_excess:.4} >= 0"),
    )
}

fn cube() -> anyhow::Result<Outcome> {
    from_experiment(run_cube(&CubeConfig::default(), derive_seed(SEED, 100)))
}

type Criterion = (&'static str, fn() -> anyhow::Result<Outcome>, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("ratio law KS", ratio_law, Duration::from_secs(60)),
        ("Laplace identity", laplace_identity, Duration::from_secs(120)),
        ("stable embedding event", theorem1, Duration::from_secs(300)),
        ("half moment", moment, Duration::from_secs(60)),
        ("Walsh lower bound", walsh, Duration::from_secs(600)),
        ("short-diagonal inequality", short_diagonal, Duration::from_secs(60)),
        ("Laakso doubling, certificate, realization", laakso_checks, Duration::from_secs(600)),
        ("snowflake envelope, contraction, band", snowflake, Duration::from_secs(900)),
        ("tightness recursion", tightness, Duration::from_secs(60)),
        ("hypercube concentration", cube, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (k, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && took < *budget, o.detail),
            Err(e) => (false, format!("error: {e:#}")),
        };
        if !passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {name} | {detail} | {:.1}s (budget {}s)",
            k + 1,
            if passed { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
