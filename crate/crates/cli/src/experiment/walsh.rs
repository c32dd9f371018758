use std::collections::BTreeMap;

use anyhow::ensure;
use l1lab::graph::walsh_pointset;
use l1lab::lower::{heuristic_best_linear, walsh_linear_distortion, LinearMap, SearchParams};
use l1lab::seed::{derive_seed, rng};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentResult, ExperimentSpec, Verdict};

/// Largest order accepted in search mode.
pub const MAX_SEARCH_ORDER: u32 = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WalshConfig {
    pub ks: Vec<u32>,
    pub ps: Vec<f64>,
    pub restarts: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Random Gaussian maps per (k, p) for the Parseval residual.
    pub random_maps: usize,
    pub max_residual: f64,
    pub beat_tolerance: f64,
    /// Tolerance for reaching the optimum sqrt(2) at k = 1, p = 1.
    pub attain_tolerance: f64,
}

impl Default for WalshConfig {
    fn default() -> Self {
        WalshConfig {
            ks: vec![1, 2, 3, 4],
            ps: vec![1.0, 1.5],
            restarts: 20,
            iterations: 1500,
            learning_rate: 0.02,
            random_maps: 100,
            max_residual: 1e-12,
            beat_tolerance: 1e-6,
            attain_tolerance: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshRecord {
    pub k: u32,
    pub p: f64,
    pub n: usize,
    pub bound: f64,
    pub identity_distortion: f64,
    pub best_distortion: f64,
    /// `best_distortion - bound`; never below `-beat_tolerance`.
    pub gap: f64,
    pub max_residual: f64,
}

/// Seeds: search for `(k, p)` at position `r` in the grid uses `derive_seed(derive_seed(seed, 0), r)`,
/// random maps use `derive_seed(derive_seed(seed, 1), r)`.
pub fn run_walsh(cfg: &WalshConfig, seed: u64) -> anyhow::Result<ExperimentResult> {
    ensure!(!cfg.ks.is_empty() && !cfg.ps.is_empty(), "walsh needs at least one k and one p");
    ensure!(cfg.ks.iter().all(|&k| (1..=MAX_SEARCH_ORDER).contains(&k)), "walsh search needs 1 <= k <= {MAX_SEARCH_ORDER}");
    ensure!(cfg.ps.iter().all(|&p| p >= 1.0 && p.is_finite()), "walsh needs finite p >= 1");
    let mut records = Vec::new();
    let mut r = 0u64;
    for &k in &cfg.ks {
        for &p in &cfg.ps {
            let a = walsh_pointset(k, p)?;
            let d = a.dim();
            let identity = walsh_linear_distortion(&LinearMap::identity(d, p), &a, p)?;
            let mut g = rng(derive_seed(derive_seed(seed, 1), r));
            let mut max_residual: f64 = identity.residual;
            for _ in 0..cfg.random_maps {
                let m: Vec<Vec<f64>> = (0..d).map(|_| (0..d).map(|_| StandardNormal.sample(&mut g)).collect()).collect();
                let e = walsh_linear_distortion(&LinearMap::new(m, p)?, &a, p)?;
                max_residual = max_residual.max(e.residual);
            }
            let params = SearchParams {
                iterations: cfg.iterations,
                restarts: cfg.restarts,
                learning_rate: cfg.learning_rate,
                seed: derive_seed(derive_seed(seed, 0), r),
            };
            let (_, report) = heuristic_best_linear(&a, p, &params)?;
            records.push(WalshRecord {
                k,
                p,
                n: a.len(),
                bound: identity.bound,
                identity_distortion: identity.report.distortion,
                best_distortion: report.distortion,
                gap: report.distortion - identity.bound,
                max_residual,
            });
            r += 1;
        }
    }
    let max_residual = records.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    let min_gap = records.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let mut aggregates = BTreeMap::from([
        ("max_residual".to_string(), max_residual),
        ("min_gap".to_string(), min_gap),
    ]);
    let mut verdicts = vec![
        Verdict::at_most("max_residual", max_residual, cfg.max_residual),
        Verdict::at_least("min_gap", min_gap, -cfg.beat_tolerance),
    ];
    if let Some(rec) = records.iter().find(|r| r.k == 1 && r.p == 1.0) {
        aggregates.insert("k1_p1_gap".into(), rec.gap);
        verdicts.push(Verdict::at_most("k1_p1_gap", rec.gap, cfg.attain_tolerance));
    }
    let config = ExperimentConfig { spec: ExperimentSpec::Walsh(cfg.clone()), seed };
    ExperimentResult::new(config, &records, aggregates, verdicts)
}
