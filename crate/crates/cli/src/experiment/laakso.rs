use std::collections::BTreeMap;

use anyhow::ensure;
use l1lab::graph::{l1_realize, laakso, shortest_path_metric, MAX_REALIZE_VERTICES};
use l1lab::lower::{certify_laakso_embedding, stress_embedding};
use l1lab::metric::{doubling_constant, CoverMode, MAX_EXACT_POINTS};
use l1lab::seed::derive_seed;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentResult, ExperimentSpec, Verdict};

/// Largest level handled by the experiment.
pub const MAX_EXPERIMENT_LEVEL: u32 = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LaaksoConfig {
    pub levels: Vec<u32>,
    /// Exponent of the heuristic image handed to the certifier.
    pub p: f64,
    pub stress_dim: usize,
    pub stress_iterations: usize,
    pub max_doubling: usize,
    /// Budget on the l_1 realization of G_1.
    pub max_realize_distortion: f64,
}

impl Default for LaaksoConfig {
    fn default() -> Self {
        LaaksoConfig {
            levels: vec![0, 1, 2, 3],
            p: 2.0,
            stress_dim: 3,
            stress_iterations: 300,
            max_doubling: 6,
            max_realize_distortion: 1.0 + 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaaksoRecord {
    pub level: u32,
    pub vertices: usize,
    pub doubling_exact: Option<usize>,
    pub doubling_greedy: usize,
    pub certified_expansion: f64,
    pub bound: f64,
    pub certificate_passed: bool,
    pub heuristic_distortion: f64,
    pub realize_distortion: Option<f64>,
}

/// Seeds: the heuristic image of level `i` starts from `derive_seed(seed, i)`.
pub fn run_laakso(cfg: &LaaksoConfig, seed: u64) -> anyhow::Result<ExperimentResult> {
    ensure!(!cfg.levels.is_empty(), "laakso needs at least one level");
    ensure!(
        cfg.levels.iter().all(|&i| i <= MAX_EXPERIMENT_LEVEL),
        "laakso levels must be at most {MAX_EXPERIMENT_LEVEL}"
    );
    ensure!(cfg.p > 1.0 && cfg.p <= 2.0, "laakso certificate needs p in (1, 2]");
    let mut records = Vec::new();
    for &i in &cfg.levels {
        let g = laakso(i)?;
        let m = shortest_path_metric(&g)?;
        let doubling_exact =
            if m.len() <= MAX_EXACT_POINTS { Some(doubling_constant(&m, CoverMode::Exact)?) } else { None };
        let doubling_greedy = doubling_constant(&m, CoverMode::Greedy)?;
        let image = stress_embedding(&m, cfg.stress_dim, cfg.stress_iterations, derive_seed(seed, i as u64))?
            .with_exponent(cfg.p)?;
        let cert = certify_laakso_embedding(i, &image)?;
        let heuristic = l1lab::metric::distortion_report(&m, &image.distance_matrix()?, 1.0)?;
        let realize_distortion = if m.len() <= MAX_REALIZE_VERTICES {
            Some(l1_realize(&g, f64::INFINITY)?.1)
        } else {
            None
        };
        records.push(LaaksoRecord {
            level: i,
            vertices: m.len(),
            doubling_exact,
            doubling_greedy,
            certified_expansion: cert.achieved,
            bound: cert.bound,
            certificate_passed: cert.passed,
            heuristic_distortion: heuristic.distortion,
            realize_distortion,
        });
    }
    let max_exact = records.iter().filter_map(|r| r.doubling_exact).max();
    let min_margin = records
        .iter()
        .map(|r| r.certified_expansion - r.bound)
        .fold(f64::INFINITY, f64::min);
    let mut aggregates = BTreeMap::from([("min_certificate_margin".to_string(), min_margin)]);
    let mut verdicts = vec![Verdict::at_least("min_certificate_margin", min_margin, -l1lab::lower::CERTIFICATE_TOL)];
    if let Some(d) = max_exact {
        aggregates.insert("max_doubling_exact".into(), d as f64);
        verdicts.push(Verdict::at_most("max_doubling_exact", d as f64, cfg.max_doubling as f64));
    }
    if let Some(r) = records.iter().find(|r| r.level == 1).and_then(|r| r.realize_distortion) {
        aggregates.insert("realize_distortion_level1".into(), r);
        verdicts.push(Verdict::at_most("realize_distortion_level1", r, cfg.max_realize_distortion));
    }
    let config = ExperimentConfig { spec: ExperimentSpec::Laakso(cfg.clone()), seed };
    ExperimentResult::new(config, &records, aggregates, verdicts)
}
