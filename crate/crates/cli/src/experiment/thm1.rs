use std::collections::BTreeMap;

use anyhow::ensure;
use l1lab::graph::{random_pointset, Distribution};
use l1lab::seed::derive_seed;
use l1lab::stable::{calibrate_c, embed_theorem1, theorem1_threshold, Theorem1Params};
use l1lab::Error;
use serde::{Deserialize, Serialize};

use super::{mean, ExperimentConfig, ExperimentResult, ExperimentSpec, Verdict};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thm1Config {
    pub n: usize,
    pub d: usize,
    pub trials: usize,
    #[serde(rename = "J")]
    pub j: usize,
    pub q: f64,
    pub max_tries: usize,
    pub calibration_samples: usize,
    pub max_mean_tries: f64,
    pub max_mean_avg_expansion: f64,
}

impl Default for Thm1Config {
    fn default() -> Self {
        Thm1Config {
            n: 64,
            d: 16,
            trials: 50,
            j: 10_000,
            q: 0.5,
            max_tries: 100,
            calibration_samples: 20_000,
            max_mean_tries: 2.5,
            max_mean_avg_expansion: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm1Record {
    pub trial: usize,
    pub success: bool,
    pub tries_used: usize,
    pub colipschitz: f64,
    /// `colipschitz * sqrt(8 ln n)`; at least 1 on success.
    pub scaled_colipschitz: f64,
    pub lipschitz: f64,
    pub avg_expansion: f64,
}

/// Seeds: calibration `derive_seed(seed, 0)`; trial `t` draws its points with
/// `derive_seed(derive_seed(seed, 1), t)` and its operators with `derive_seed(derive_seed(seed, 2), t)`.
pub fn run_thm1(cfg: &Thm1Config, seed: u64) -> anyhow::Result<ExperimentResult> {
    ensure!(cfg.n >= 4, "thm1 needs n >= 4");
    ensure!(cfg.trials >= 1, "thm1 needs at least one trial");
    let cal = calibrate_c(1.0, cfg.j, cfg.calibration_samples, derive_seed(seed, 0))?;
    let threshold = theorem1_threshold(cfg.n);
    let mut records = Vec::with_capacity(cfg.trials);
    for t in 0..cfg.trials {
        let ps = random_pointset(cfg.n, cfg.d, 1.0, Distribution::Gaussian, derive_seed(derive_seed(seed, 1), t as u64))?;
        let params = Theorem1Params {
            j: cfg.j,
            c: cal.c,
            max_tries: cfg.max_tries,
            q: cfg.q,
            seed: derive_seed(derive_seed(seed, 2), t as u64),
        };
        let (success, tries_used, report) = match embed_theorem1(&ps, &params) {
            Ok(e) => (true, e.tries_used, e.report),
            Err(Error::EventNotAchieved { tries, best, .. }) => (false, tries, best.report),
            Err(e) => return Err(e.into()),
        };
        records.push(Thm1Record {
            trial: t,
            success,
            tries_used,
            colipschitz: report.colipschitz,
            scaled_colipschitz: report.colipschitz / threshold,
            lipschitz: report.lipschitz,
            avg_expansion: report.avg_expansion,
        });
    }
    let successes: Vec<&Thm1Record> = records.iter().filter(|r| r.success).collect();
    let mean_tries = mean(records.iter().map(|r| r.tries_used as f64));
    let mean_avg = mean(successes.iter().map(|r| r.avg_expansion));
    let min_scaled = successes.iter().map(|r| r.scaled_colipschitz).fold(f64::INFINITY, f64::min);
    let success_rate = successes.len() as f64 / records.len() as f64;
    let aggregates = BTreeMap::from([
        ("C".to_string(), cal.c),
        ("calibration_discrepancy".to_string(), cal.discrepancy),
        ("threshold".to_string(), threshold),
        ("mean_tries".to_string(), mean_tries),
        ("mean_avg_expansion".to_string(), mean_avg),
        ("min_scaled_colipschitz".to_string(), min_scaled),
        ("success_rate".to_string(), success_rate),
    ]);
    let verdicts = vec![
        Verdict::at_most("mean_tries", mean_tries, cfg.max_mean_tries),
        Verdict::at_most("mean_avg_expansion", mean_avg, cfg.max_mean_avg_expansion),
        Verdict::at_least("min_scaled_colipschitz", min_scaled, 1.0),
        Verdict::at_least("success_rate", success_rate, 1.0),
    ];
    let config = ExperimentConfig { spec: ExperimentSpec::Thm1(cfg.clone()), seed };
    ExperimentResult::new(config, &records, aggregates, verdicts)
}
