use std::collections::BTreeMap;

use anyhow::ensure;
use l1lab::decomp::{laakso_snowflake_lowerbound, snowflake_embed, DecompositionScheme, SnowflakeParams};
use l1lab::graph::{laakso, path_graph, shortest_path_metric};
use l1lab::seed::derive_seed;
use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, ExperimentResult, ExperimentSpec, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnowflakeMetric {
    /// Laakso graph of level `min(ceil(1/eps), max_level)`.
    Laakso,
    /// Unit path on `path_n` vertices.
    Path,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SnowflakeConfig {
    pub eps: Vec<f64>,
    pub metric: SnowflakeMetric,
    pub max_level: u32,
    pub path_n: usize,
    pub partitions: usize,
    pub signs: usize,
    pub scheme: DecompositionScheme,
    /// Largest allowed ratio between the extreme values of `distortion * sqrt(eps)`.
    pub max_band: f64,
}

impl Default for SnowflakeConfig {
    fn default() -> Self {
        SnowflakeConfig {
            eps: vec![0.5, 0.25, 0.125],
            metric: SnowflakeMetric::Laakso,
            max_level: 3,
            path_n: 64,
            partitions: 16,
            signs: 64,
            scheme: DecompositionScheme::CkrGeneral,
            max_band: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowflakeRecord {
    pub eps: f64,
    pub level: Option<u32>,
    pub points: usize,
    pub distortion: f64,
    pub lower_bound: f64,
    pub distortion_sqrt_eps: f64,
    pub delta_hat: f64,
    pub colipschitz: f64,
    pub contraction_ok: bool,
    pub fit_c: f64,
    pub max_envelope_ratio: f64,
    pub envelope_violations: usize,
    pub truncation_lower: f64,
    pub truncation_upper: f64,
    pub dimension: usize,
}

/// Seeds: grid position `r` embeds with `derive_seed(seed, r)`.
pub fn run_snowflake(cfg: &SnowflakeConfig, seed: u64) -> anyhow::Result<ExperimentResult> {
    ensure!(!cfg.eps.is_empty(), "snowflake needs at least one eps");
    ensure!(cfg.eps.iter().all(|&e| e > 0.0 && e < 1.0), "every eps must lie in (0, 1)");
    ensure!(cfg.max_level <= 3, "snowflake Laakso level is capped at 3");
    let params = SnowflakeParams { partitions: cfg.partitions, signs: cfg.signs, scheme: cfg.scheme, ..Default::default() };
    let mut records = Vec::new();
    for (r, &eps) in cfg.eps.iter().enumerate() {
        let (level, m) = match cfg.metric {
            SnowflakeMetric::Laakso => {
                let i = ((1.0 / eps).ceil() as u32).min(cfg.max_level);
                (Some(i), shortest_path_metric(&laakso(i)?)?)
            }
            SnowflakeMetric::Path => (None, shortest_path_metric(&path_graph(cfg.path_n)?)?),
        };
        let e = snowflake_embed(&m, eps, &params, derive_seed(seed, r as u64))?;
        let lower_bound = match level {
            Some(i) => laakso_snowflake_lowerbound(i, eps)?,
            None => 1.0,
        };
        let d = &e.diagnostics;
        records.push(SnowflakeRecord {
            eps,
            level,
            points: m.len(),
            distortion: e.report.distortion,
            lower_bound,
            distortion_sqrt_eps: e.report.distortion * eps.sqrt(),
            delta_hat: d.delta_hat,
            colipschitz: e.report.colipschitz,
            contraction_ok: d.contraction_ok,
            fit_c: d.fit_c,
            max_envelope_ratio: d.max_envelope_ratio,
            envelope_violations: d.envelope_violations.len(),
            truncation_lower: d.truncation_lower,
            truncation_upper: d.truncation_upper,
            dimension: d.dimension,
        });
    }
    let scaled: Vec<f64> = records.iter().map(|r| r.distortion_sqrt_eps).collect();
    let band = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    let min_excess = records.iter().map(|r| r.distortion - r.lower_bound).fold(f64::INFINITY, f64::min);
    let violations = records.iter().map(|r| r.envelope_violations).sum::<usize>() as f64;
    let contraction_failures = records.iter().filter(|r| !r.contraction_ok).count() as f64;
    let aggregates = BTreeMap::from([
        ("band".to_string(), band),
        ("min_excess_over_lower_bound".to_string(), min_excess),
        ("envelope_violations".to_string(), violations),
        ("contraction_failures".to_string(), contraction_failures),
    ]);
    let verdicts = vec![
        Verdict::at_most("band", band, cfg.max_band),
        Verdict::at_least("min_excess_over_lower_bound", min_excess, -1e-9),
        Verdict::at_most("envelope_violations", violations, 0.0),
        Verdict::at_most("contraction_failures", contraction_failures, 0.0),
    ];
    let config = ExperimentConfig { spec: ExperimentSpec::Snowflake(cfg.clone()), seed };
    ExperimentResult::new(config, &records, aggregates, verdicts)
}
