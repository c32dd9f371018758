use std::collections::BTreeMap;

use anyhow::ensure;
use l1lab::lower::hypercube_concentration_check;
use l1lab::seed::{derive_seed, rng};
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentResult, ExperimentSpec, Verdict};

/// Largest cube dimension.
pub const MAX_CUBE_K: u32 = 14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CubeConfig {
    pub ks: Vec<u32>,
    pub alphas: Vec<f64>,
    /// Coordinates are distances to vertex 0 and to this many random vertices.
    pub random_vertices: usize,
}

impl Default for CubeConfig {
    fn default() -> Self {
        CubeConfig { ks: vec![10, 12], alphas: vec![1.0, 2.0], random_vertices: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeRecord {
    pub k: u32,
    pub alpha: f64,
    pub vertex: u64,
    pub tail: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Seeds: random vertices for dimension `k` come from `derive_seed(seed, k)`.
pub fn run_cube(cfg: &CubeConfig, seed: u64) -> anyhow::Result<ExperimentResult> {
    ensure!(!cfg.ks.is_empty() && !cfg.alphas.is_empty(), "cube needs at least one k and one alpha");
    ensure!(cfg.ks.iter().all(|&k| (1..=MAX_CUBE_K).contains(&k)), "cube needs 1 <= k <= {MAX_CUBE_K}");
    let mut records = Vec::new();
    for &k in &cfg.ks {
        let size = 1u64 << k;
        let mut g = rng(derive_seed(seed, k as u64));
        let mut vertices = vec![0u64];
        vertices.extend((0..cfg.random_vertices).map(|_| g.random_range(0..size)));
        for &v in &vertices {
            let coords: Vec<f64> = (0..size).map(|x| (x ^ v).count_ones() as f64).collect();
            for &alpha in &cfg.alphas {
                let c = hypercube_concentration_check(&coords, alpha)?;
                records.push(CubeRecord { k, alpha, vertex: v, tail: c.achieved, bound: c.bound, passed: c.passed });
            }
        }
    }
    let worst = records.iter().map(|r| r.tail / r.bound).fold(0.0, f64::max);
    let failures = records.iter().filter(|r| !r.passed).count() as f64;
    let aggregates = BTreeMap::from([
        ("max_tail_over_bound".to_string(), worst),
        ("failures".to_string(), failures),
    ]);
    let verdicts = vec![Verdict::at_most("failures", failures, 0.0)];
    let config = ExperimentConfig { spec: ExperimentSpec::Cube(cfg.clone()), seed };
    ExperimentResult::new(config, &records, aggregates, verdicts)
}
