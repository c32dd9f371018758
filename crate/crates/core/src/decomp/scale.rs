use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::partition::{padded_partition, DecompositionScheme, Partition};
use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::seed::{derive_seed, rng};

/// Largest cluster count for which all `2^|P|` sign vectors are enumerated.
pub const MAX_ENUMERATED_CLUSTERS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    /// `k` i.i.d. uniform sign vectors per partition.
    Sampled(usize),
    /// All `2^|P|` sign vectors.
    Enumerate,
}

/// `rho_n = 2^(n / (1 - eps))`.
pub fn scale_radius(n: i32, eps: f64) -> f64 {
    (n as f64 / (1.0 - eps)).exp2()
}

/// `phi_n`: partitions at radius `rho_n`, each contributing `k` signed pad coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMap {
    pub n: i32,
    pub eps: f64,
    pub rho: f64,
    pub partitions: Vec<Partition>,
    /// `signs[i][s][c]` is the sign of cluster `c` in sign vector `s` of partition `i`.
    pub signs: Vec<Vec<Vec<i8>>>,
    n_points: usize,
    dim: usize,
    coords: Vec<f64>,
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} outside (0, 1)")));
    }
    Ok(())
}

fn enumerate_signs(clusters: usize) -> Result<Vec<Vec<i8>>> {
    if clusters > MAX_ENUMERATED_CLUSTERS {
        return Err(Error::ResourceLimit(format!(
            "sign enumeration over {clusters} clusters (limit {MAX_ENUMERATED_CLUSTERS})"
        )));
    }
    Ok((0..1u32 << clusters)
        .map(|mask| (0..clusters).map(|c| if mask >> c & 1 == 1 { -1 } else { 1 }).collect())
        .collect())
}

impl ScaleMap {
    /// Builds the map from given partitions and signs.
    pub fn from_parts(n: i32, eps: f64, partitions: Vec<Partition>, signs: Vec<Vec<Vec<i8>>>) -> Result<Self> {
        check_eps(eps)?;
        if partitions.is_empty() || partitions.len() != signs.len() {
            return Err(Error::ShapeError("need one sign set per partition, and at least one partition".into()));
        }
        let n_points = partitions[0].cluster_of.len();
        let weight = (1.0 / partitions.len() as f64).sqrt();
        let dim: usize = signs.iter().map(Vec::len).sum();
        let mut coords = vec![0.0; n_points * dim];
        let mut offset = 0;
        for (p, s) in partitions.iter().zip(&signs) {
            if p.cluster_of.len() != n_points || s.is_empty() {
                return Err(Error::ShapeError("partitions disagree on point count or have no signs".into()));
            }
            let scale = weight / (s.len() as f64).sqrt();
            for (k, sigma) in s.iter().enumerate() {
                if sigma.len() != p.len() {
                    return Err(Error::ShapeError("sign vector length differs from cluster count".into()));
                }
                for x in 0..n_points {
                    coords[x * dim + offset + k] = sigma[p.cluster_of[x]] as f64 * p.pads[x] * scale;
                }
            }
            offset += s.len();
        }
        Ok(ScaleMap { n, eps, rho: scale_radius(n, eps), partitions, signs, n_points, dim, coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn point(&self, x: usize) -> &[f64] {
        &self.coords[x * self.dim..(x + 1) * self.dim]
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        crate::metric::lp_distance(self.point(x), self.point(y), 2.0)
    }

    /// Mean over partitions of `pad(x) / rho`.
    pub fn mean_relative_pad(&self, x: usize) -> f64 {
        self.partitions.iter().map(|p| p.pads[x]).sum::<f64>() / (self.partitions.len() as f64 * self.rho)
    }
}

/// Samples `phi_n`; partition `i` uses seed `derive_seed(seed, 2i)` and its signs `derive_seed(seed, 2i + 1)`.
pub fn scale_map(
    m: &FiniteMetricSpace,
    n: i32,
    eps: f64,
    m_partitions: usize,
    signs: SignMode,
    scheme: DecompositionScheme,
    seed: u64,
) -> Result<ScaleMap> {
    check_eps(eps)?;
    if m_partitions == 0 {
        return Err(Error::InvalidParameter("need at least one partition per scale".into()));
    }
    if signs == SignMode::Sampled(0) {
        return Err(Error::InvalidParameter("need at least one sign vector".into()));
    }
    let rho = scale_radius(n, eps);
    let mut parts = Vec::with_capacity(m_partitions);
    let mut all_signs = Vec::with_capacity(m_partitions);
    for i in 0..m_partitions as u64 {
        let p = padded_partition(m, rho, scheme, derive_seed(seed, 2 * i))?;
        let s = match signs {
            SignMode::Enumerate => enumerate_signs(p.len())?,
            SignMode::Sampled(k) => {
                let mut r = rng(derive_seed(seed, 2 * i + 1));
                (0..k)
                    .map(|_| (0..p.len()).map(|_| if r.random::<bool>() { 1 } else { -1 }).collect())
                    .collect()
            }
        };
        parts.push(p);
        all_signs.push(s);
    }
    ScaleMap::from_parts(n, eps, parts, all_signs)
}
