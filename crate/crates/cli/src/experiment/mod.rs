//! Desk-scale experiments. Every run is a pure function of its config.

mod cube;
mod laakso;
mod snowflake;
mod thm1;
mod walsh;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use cube::CubeConfig;
pub use laakso::LaaksoConfig;
pub use snowflake::{SnowflakeConfig, SnowflakeMetric};
pub use thm1::Thm1Config;
pub use walsh::{WalshConfig, MAX_SEARCH_ORDER};

pub use cube::run_cube;
pub use laakso::run_laakso;
pub use snowflake::run_snowflake;
pub use thm1::run_thm1;
pub use walsh::run_walsh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    Thm1(Thm1Config),
    Walsh(WalshConfig),
    Laakso(LaaksoConfig),
    Snowflake(SnowflakeConfig),
    Cube(CubeConfig),
}

impl ExperimentSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentSpec::Thm1(_) => "thm1",
            ExperimentSpec::Walsh(_) => "walsh",
            ExperimentSpec::Laakso(_) => "laakso",
            ExperimentSpec::Snowflake(_) => "snowflake",
            ExperimentSpec::Cube(_) => "cube",
        }
    }

    /// Default configuration of the named experiment.
    pub fn default_for(name: &str) -> Option<Self> {
        Some(match name {
            "thm1" => ExperimentSpec::Thm1(Thm1Config::default()),
            "walsh" => ExperimentSpec::Walsh(WalshConfig::default()),
            "laakso" => ExperimentSpec::Laakso(LaaksoConfig::default()),
            "snowflake" => ExperimentSpec::Snowflake(SnowflakeConfig::default()),
            "cube" => ExperimentSpec::Cube(CubeConfig::default()),
            _ => return None,
        })
    }
}

/// A full experiment description; `seed` is the only source of randomness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub spec: ExperimentSpec,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

impl std::fmt::Display for Comparison {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub value: f64,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
}

impl Verdict {
    pub fn new(name: impl Into<String>, value: f64, comparison: Comparison, threshold: f64) -> Self {
        let passed = match comparison {
            Comparison::AtMost => value <= threshold,
            Comparison::AtLeast => value >= threshold,
        };
        Verdict { name: name.into(), value, comparison, threshold, passed }
    }

    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::AtMost, threshold)
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self::new(name, value, Comparison::AtLeast, threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub records: Vec<serde_json::Value>,
    pub aggregates: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

impl ExperimentResult {
    fn new<R: Serialize>(
        config: ExperimentConfig,
        records: &[R],
        aggregates: BTreeMap<String, f64>,
        verdicts: Vec<Verdict>,
    ) -> anyhow::Result<Self> {
        let records = records.iter().map(serde_json::to_value).collect::<Result<_, _>>()?;
        let passed = verdicts.iter().all(|v| v.passed);
        Ok(ExperimentResult { config, records, aggregates, verdicts, passed })
    }
}

pub fn run(config: &ExperimentConfig) -> anyhow::Result<ExperimentResult> {
    match &config.spec {
        ExperimentSpec::Thm1(c) => run_thm1(c, config.seed),
        ExperimentSpec::Walsh(c) => run_walsh(c, config.seed),
        ExperimentSpec::Laakso(c) => run_laakso(c, config.seed),
        ExperimentSpec::Snowflake(c) => run_snowflake(c, config.seed),
        ExperimentSpec::Cube(c) => run_cube(c, config.seed),
    }
}

fn mean(v: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = v.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        f64::NAN
    } else {
        s / n as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        for name in ["thm1", "walsh", "laakso", "snowflake", "cube"] {
            let c = ExperimentConfig { spec: ExperimentSpec::default_for(name).unwrap(), seed: 4 };
            let json = serde_json::to_string(&c).unwrap();
            assert!(json.contains(&format!("\"experiment\":\"{name}\"")));
            assert_eq!(serde_json::from_str::<ExperimentConfig>(&json).unwrap(), c);
        }
        let partial: ExperimentConfig = serde_json::from_str(r#"{"experiment":"thm1","seed":3,"n":8}"#).unwrap();
        let ExperimentSpec::Thm1(t) = partial.spec else { panic!() };
        assert_eq!(t.n, 8);
        assert_eq!(t.d, Thm1Config::default().d);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"experiment":"thm1"}"#).is_err());
    }

    #[test]
    fn verdict_directions() {
        assert!(Verdict::at_most("a", 1.0, 1.0).passed);
        assert!(!Verdict::at_most("a", 1.1, 1.0).passed);
        assert!(Verdict::at_least("a", 1.0, 1.0).passed);
        assert!(!Verdict::at_least("a", f64::NAN, 1.0).passed);
    }
}
