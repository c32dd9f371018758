//! Multi-scale snowflake embeddings into l_2 built from padded random partitions.

mod partition;
mod scale;

pub use partition::{measure_padding, padded_partition, DecompositionScheme, PaddingEstimate, Partition};
pub use scale::{scale_map, scale_radius, ScaleMap, SignMode, MAX_ENUMERATED_CLUSTERS};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{distortion_report, snowflake, DistortionReport, FiniteMetricSpace, PointSet};
use crate::seed::derive_seed;

/// Slack allowed on the per-scale envelope `2 min(d, rho_n)` for sampled signs.
pub const ENVELOPE_SLACK: f64 = 1.25;

/// Block weight `2^(-n eps / (1 - eps))`.
pub fn block_weight(n: i32, eps: f64) -> f64 {
    (-(n as f64) * eps / (1.0 - eps)).exp2()
}

/// Scales that must be present: `2^n` in `[dmin^(1-eps)/2, 2 diam^(1-eps)]`.
pub fn required_scales(m: &FiniteMetricSpace, eps: f64) -> Option<(i32, i32)> {
    let dmin = m.min_positive_distance()?;
    let lo = ((1.0 - eps) * dmin.log2() - 1.0).ceil() as i32;
    let hi = ((1.0 - eps) * m.diameter().log2() + 1.0).floor() as i32;
    Some((lo, hi))
}

/// `Phi = sum_n 2^(-n eps/(1-eps)) phi_n (x) e_n` over the provided scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiScaleEmbedding {
    pub eps: f64,
    pub n_min: i32,
    pub n_max: i32,
    pub scales: Vec<ScaleMap>,
    pub weights: Vec<f64>,
    pub image: PointSet,
}

pub fn assouad_combine(m: &FiniteMetricSpace, eps: f64, mut scale_maps: Vec<ScaleMap>) -> Result<MultiScaleEmbedding> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    if scale_maps.is_empty() {
        return Err(Error::InvalidParameter("no scales given".into()));
    }
    scale_maps.sort_by_key(|s| s.n);
    if let Some(w) = scale_maps.windows(2).find(|w| w[0].n == w[1].n) {
        return Err(Error::InvalidParameter(format!("scale {} given twice", w[0].n)));
    }
    if let Some(s) = scale_maps.iter().find(|s| s.n_points() != m.len() || s.eps != eps) {
        return Err(Error::ShapeError(format!("scale {} does not match the metric or eps", s.n)));
    }
    if let Some((lo, hi)) = required_scales(m, eps) {
        if let Some(n) = (lo..=hi).find(|n| scale_maps.binary_search_by_key(n, |s| s.n).is_err()) {
            return Err(Error::IncompleteScales(n));
        }
    }
    let weights: Vec<f64> = scale_maps.iter().map(|s| block_weight(s.n, eps)).collect();
    let dim: usize = scale_maps.iter().map(ScaleMap::dim).sum();
    let mut coords = Vec::with_capacity(m.len() * dim);
    for x in 0..m.len() {
        for (s, w) in scale_maps.iter().zip(&weights) {
            coords.extend(s.point(x).iter().map(|v| v * w));
        }
    }
    Ok(MultiScaleEmbedding {
        eps,
        n_min: scale_maps[0].n,
        n_max: scale_maps[scale_maps.len() - 1].n,
        image: PointSet::from_flat(2.0, dim, coords)?,
        scales: scale_maps,
        weights,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnowflakeParams {
    pub partitions: usize,
    pub signs: usize,
    pub scheme: DecompositionScheme,
    pub q: f64,
    /// Budget for the dropped small scales, relative to `d^(2(1-eps))`.
    pub truncation_budget: f64,
}

impl Default for SnowflakeParams {
    fn default() -> Self {
        SnowflakeParams { partitions: 16, signs: 64, scheme: DecompositionScheme::CkrGeneral, q: 0.5, truncation_budget: 0.05 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeViolation {
    pub n: i32,
    pub i: usize,
    pub j: usize,
    /// `||phi_n(x_i) - phi_n(x_j)|| / (2 min(d, rho_n))`.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowflakeDiagnostics {
    /// Smallest mean relative pad over points and scales, from the partitions used.
    pub delta_hat: f64,
    /// `max eps ||Phi(x) - Phi(y)||^2 / d^(2(1-eps))`.
    pub fit_c: f64,
    /// Bound on the squared contribution of scales below `n_min`, relative to `d^(2(1-eps))`.
    pub truncation_lower: f64,
    /// Same for scales above `n_max`; zero when those scales collapse to one cluster.
    pub truncation_upper: f64,
    pub max_envelope_ratio: f64,
    pub envelope_violations: Vec<EnvelopeViolation>,
    /// `colipschitz >= delta_hat / 4`.
    pub contraction_ok: bool,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnowflakeEmbedding {
    pub embedding: MultiScaleEmbedding,
    pub report: DistortionReport,
    pub diagnostics: SnowflakeDiagnostics,
}

/// Scale range used by [`snowflake_embed`].
pub fn scale_range(m: &FiniteMetricSpace, eps: f64, params: &SnowflakeParams) -> Result<(i32, i32)> {
    let (lo, hi) = required_scales(m, eps).ok_or_else(|| Error::DegenerateInput("need two distinct points".into()))?;
    let dmin = m.min_positive_distance().expect("checked above");
    // (4/3) 4^n_min <= budget * dmin^(2(1-eps))
    let n_min = ((1.0 - eps) * dmin.log2() + 0.5 * (0.75 * params.truncation_budget).log2()).floor() as i32;
    let n_max = match params.scheme {
        // rho_n >= 4 diam forces a single cluster for every radius draw.
        DecompositionScheme::CkrGeneral => ((1.0 - eps) * (4.0 * m.diameter()).log2()).ceil() as i32,
        DecompositionScheme::SingletonFallback => hi + 8,
    };
    Ok((n_min.min(lo), n_max.max(hi)))
}

fn truncation_bounds(m: &FiniteMetricSpace, eps: f64, scheme: DecompositionScheme, n_min: i32, n_max: i32) -> (f64, f64) {
    let dmin = m.min_positive_distance().unwrap_or(1.0);
    let lower = 4.0 / 3.0 * 4f64.powi(n_min) / dmin.powf(2.0 * (1.0 - eps));
    let upper = match scheme {
        DecompositionScheme::CkrGeneral => 0.0,
        DecompositionScheme::SingletonFallback => {
            let r = (-2.0 * eps / (1.0 - eps)).exp2();
            4.0 * m.diameter().powf(2.0 * eps) * r.powi(n_max + 1) / (1.0 - r)
        }
    };
    (lower, upper)
}

/// Full pipeline: scales, combination, and diagnostics against `snowflake(m, eps)`.
/// Scale `n` is seeded with `derive_seed(seed, n as u64)`.
pub fn snowflake_embed(m: &FiniteMetricSpace, eps: f64, params: &SnowflakeParams, seed: u64) -> Result<SnowflakeEmbedding> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    if m.len() < 2 {
        return Err(Error::DegenerateInput("need at least two points".into()));
    }
    let (n_min, n_max) = scale_range(m, eps, params)?;
    let scales = (n_min..=n_max)
        .map(|n| {
            scale_map(
                m,
                n,
                eps,
                params.partitions,
                SignMode::Sampled(params.signs),
                params.scheme,
                derive_seed(seed, n as i64 as u64),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let embedding = assouad_combine(m, eps, scales)?;
    let target = snowflake(m, eps)?;
    let report = distortion_report(&target, &embedding.image.distance_matrix()?, params.q)?;

    let n = m.len();
    let delta_hat = embedding
        .scales
        .iter()
        .flat_map(|s| (0..n).map(move |x| s.mean_relative_pad(x)))
        .fold(f64::INFINITY, f64::min);
    let fit_c = m
        .pairs()
        .map(|(i, j)| eps * embedding.image.distance(i, j).powi(2) / target.get(i, j).powi(2))
        .fold(0.0, f64::max);
    let mut max_envelope_ratio: f64 = 0.0;
    let mut envelope_violations = Vec::new();
    for s in &embedding.scales {
        for (i, j) in m.pairs() {
            let ratio = s.distance(i, j) / (2.0 * m.get(i, j).min(s.rho));
            max_envelope_ratio = max_envelope_ratio.max(ratio);
            if ratio > ENVELOPE_SLACK {
                envelope_violations.push(EnvelopeViolation { n: s.n, i, j, ratio });
            }
        }
    }
    let (truncation_lower, truncation_upper) = truncation_bounds(m, eps, params.scheme, n_min, n_max);
    let diagnostics = SnowflakeDiagnostics {
        delta_hat,
        fit_c,
        truncation_lower,
        truncation_upper,
        max_envelope_ratio,
        envelope_violations,
        contraction_ok: report.colipschitz >= delta_hat / 4.0,
        dimension: embedding.image.dim(),
    };
    Ok(SnowflakeEmbedding { embedding, report, diagnostics })
}

/// `max(1, sqrt(L_i))` with `L_0 = 1`, `L_j = L_(j-1) / 4^eps + 1/4`: a lower bound on
/// the Euclidean distortion of the `(1 - eps)`-snowflake of the Laakso graph `G_i`.
pub fn laakso_snowflake_lowerbound(i: u32, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside [0, 1)")));
    }
    let shrink = 4f64.powf(-eps);
    let l = (0..i).fold(1.0, |l, _| l * shrink + 0.25);
    Ok(l.sqrt().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, shortest_path_metric};

    fn path(n: usize) -> FiniteMetricSpace {
        shortest_path_metric(&path_graph(n).unwrap()).unwrap()
    }

    #[test]
    fn weights_step_geometrically() {
        for eps in [0.125, 0.5, 0.9] {
            for n in -3..3 {
                let r = block_weight(n + 1, eps) / block_weight(n, eps);
                assert!((r - (-eps / (1.0 - eps)).exp2()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn single_scale_is_weighted_block() {
        let m = FiniteMetricSpace::from_fn(None, 2, |_, _| 1.0).unwrap();
        // Required range for d = 1, eps = 1/2 is exactly n in {-1, 0, 1}; try a
        // one-point space instead to test a lone block.
        let one = FiniteMetricSpace::from_fn(None, 1, |_, _| 0.0).unwrap();
        let s = scale_map(&one, 2, 0.5, 2, SignMode::Sampled(3), DecompositionScheme::CkrGeneral, 0).unwrap();
        let e = assouad_combine(&one, 0.5, vec![s.clone()]).unwrap();
        let w = block_weight(2, 0.5);
        for (a, b) in e.image.row(0).iter().zip(s.point(0)) {
            assert_eq!(*a, b * w);
        }
        let s = scale_map(&m, 0, 0.5, 2, SignMode::Sampled(3), DecompositionScheme::CkrGeneral, 0).unwrap();
        assert!(matches!(assouad_combine(&m, 0.5, vec![s]), Err(Error::IncompleteScales(-1))));
    }

    #[test]
    fn two_points() {
        let m = FiniteMetricSpace::from_fn(None, 2, |_, _| 3.0).unwrap();
        for eps in [0.1, 0.5, 0.8] {
            let e = snowflake_embed(&m, eps, &SnowflakeParams::default(), 1).unwrap();
            assert!((e.report.distortion - 1.0).abs() < 1e-12);
            assert!(e.diagnostics.envelope_violations.is_empty());
            assert!(e.diagnostics.contraction_ok);
            assert!(e.diagnostics.truncation_lower <= 0.05);
        }
    }

    #[test]
    fn path_diagnostics() {
        let m = path(16);
        let e = snowflake_embed(&m, 0.25, &SnowflakeParams::default(), 5).unwrap();
        let d = &e.diagnostics;
        assert!(d.envelope_violations.is_empty(), "{:?}", d.envelope_violations.first());
        assert!(d.contraction_ok, "{} vs {}", e.report.colipschitz, d.delta_hat);
        assert!(d.truncation_lower <= 0.05);
        assert_eq!(d.truncation_upper, 0.0);
        assert!(e.report.lipschitz <= (d.fit_c / 0.25).sqrt() * (1.0 + 1e-12));
        // Scales past n_max are single clusters.
        let top = e.embedding.scales.last().unwrap();
        assert!(top.partitions.iter().all(|p| p.len() == 1));
        assert_eq!(e, snowflake_embed(&m, 0.25, &SnowflakeParams::default(), 5).unwrap());
    }

    #[test]
    fn lower_bound_recursion() {
        assert_eq!(laakso_snowflake_lowerbound(0, 0.3).unwrap(), 1.0);
        for i in 0..=8 {
            assert_eq!(laakso_snowflake_lowerbound(i, 0.0).unwrap(), (1.0 + i as f64 / 4.0).sqrt());
        }
        // L_2 = 0.625 at eps = 1/2; the clamp returns 1.
        assert_eq!(laakso_snowflake_lowerbound(2, 0.5).unwrap(), 1.0);
        assert!(laakso_snowflake_lowerbound(2, 1.0).is_err());
    }

    #[test]
    fn rejects_eps() {
        let m = path(3);
        assert!(matches!(snowflake_embed(&m, 0.0, &SnowflakeParams::default(), 0), Err(Error::InvalidParameter(_))));
    }
}
