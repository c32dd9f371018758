use serde::{Deserialize, Serialize};

use super::{apply, sample_operator, DEFAULT_J};
use crate::error::{Error, Result};
use crate::metric::{metric_from_points, DistortionReport, FiniteMetricSpace, PointSet};
use crate::seed::derive_seed;

/// Required co-Lipschitz constant `1 / sqrt(8 ln n)`.
pub fn theorem1_threshold(n: usize) -> f64 {
    1.0 / (8.0 * (n as f64).ln()).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Params {
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "C")]
    pub c: f64,
    pub max_tries: usize,
    pub q: f64,
    pub seed: u64,
}

impl Theorem1Params {
    pub fn new(c: f64, seed: u64) -> Self {
        Theorem1Params { j: DEFAULT_J, c, max_tries: 100, q: 0.5, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Embedding {
    pub image: PointSet,
    pub report: DistortionReport,
    pub tries_used: usize,
    pub threshold: f64,
}

fn attempt(ps: &PointSet, src: &FiniteMetricSpace, params: &Theorem1Params, t: usize) -> Result<Theorem1Embedding> {
    let op = sample_operator(1.0, ps.dim(), params.j, params.c, derive_seed(params.seed, t as u64))?;
    let image = apply(&op, ps)?;
    let n = ps.len();
    let ratios = src.pairs().map(|(a, b)| image.distance(a, b) / src.get(a, b));
    let report = DistortionReport::from_ratios(ratios, params.q)?;
    Ok(Theorem1Embedding { image, report, tries_used: t + 1, threshold: theorem1_threshold(n) })
}

/// Resamples operators (try `t` uses seed `derive_seed(seed, t)`) until every
/// pair ratio `||T f_i - T f_j||_2 / ||f_i - f_j||_1` is at least `1/sqrt(8 ln n)`.
pub fn embed_theorem1(ps: &PointSet, params: &Theorem1Params) -> Result<Theorem1Embedding> {
    if ps.p() != 1.0 {
        return Err(Error::InvalidParameter(format!("input must be an l_1 point set, got p = {}", ps.p())));
    }
    if ps.len() < 2 {
        return Err(Error::DegenerateInput("need at least two points".into()));
    }
    if params.max_tries == 0 {
        return Err(Error::InvalidParameter("max_tries must be at least 1".into()));
    }
    let src = metric_from_points(ps)?;
    let threshold = theorem1_threshold(ps.len());
    let mut best: Option<Theorem1Embedding> = None;
    for t in 0..params.max_tries {
        let e = attempt(ps, &src, params, t)?;
        if e.report.colipschitz >= threshold {
            return Ok(e);
        }
        if best.as_ref().is_none_or(|b| e.report.colipschitz > b.report.colipschitz) {
            best = Some(e);
        }
    }
    let best = best.expect("at least one try");
    Err(Error::EventNotAchieved {
        tries: params.max_tries,
        best_min_ratio: best.report.colipschitz,
        threshold,
        best: Box::new(best),
    })
}
