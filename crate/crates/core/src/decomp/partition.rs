use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::FiniteMetricSpace;
use crate::seed::{derive_seed, rng};

/// How random partitions are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DecompositionScheme {
    /// Ball carving: radius uniform in `[rho/4, rho/2]`, centers in random order.
    #[default]
    CkrGeneral,
    /// Every point is its own cluster.
    SingletonFallback,
}

/// A partition into clusters of diameter at most `rho`, with per-point padding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub rho: f64,
    pub cluster_of: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
    /// `min(rho, d(x, X \ C_x))`, and `rho` when `C_x = X`.
    pub pads: Vec<f64>,
}

impl Partition {
    /// Builds a partition from cluster assignments; ids are renumbered by first occurrence.
    pub fn from_assignment(m: &FiniteMetricSpace, rho: f64, assignment: &[usize]) -> Result<Self> {
        let n = m.len();
        if assignment.len() != n {
            return Err(Error::ShapeError(format!("{} assignments for {n} points", assignment.len())));
        }
        let mut relabel = std::collections::BTreeMap::new();
        let mut cluster_of = Vec::with_capacity(n);
        let mut clusters: Vec<Vec<usize>> = Vec::new();
        for (x, &a) in assignment.iter().enumerate() {
            let next = relabel.len();
            let id = *relabel.entry(a).or_insert(next);
            if id == clusters.len() {
                clusters.push(Vec::new());
            }
            clusters[id].push(x);
            cluster_of.push(id);
        }
        let pads = (0..n)
            .map(|x| {
                (0..n)
                    .filter(|&y| cluster_of[y] != cluster_of[x])
                    .map(|y| m.get(x, y))
                    .fold(rho, f64::min)
            })
            .collect();
        Ok(Partition { rho, cluster_of, clusters, pads })
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn cluster_diameter(&self, m: &FiniteMetricSpace, c: usize) -> f64 {
        let pts = &self.clusters[c];
        let mut best: f64 = 0.0;
        for (a, &x) in pts.iter().enumerate() {
            for &y in &pts[a + 1..] {
                best = best.max(m.get(x, y));
            }
        }
        best
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must be positive and finite")));
    }
    Ok(())
}

/// Draws one partition; deterministic per seed.
pub fn padded_partition(m: &FiniteMetricSpace, rho: f64, scheme: DecompositionScheme, seed: u64) -> Result<Partition> {
    check_rho(rho)?;
    let n = m.len();
    let assignment: Vec<usize> = match scheme {
        DecompositionScheme::SingletonFallback => (0..n).collect(),
        DecompositionScheme::CkrGeneral => {
            let mut r = rng(seed);
            let radius = r.random_range(0.25 * rho..=0.5 * rho);
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut r);
            (0..n)
                .map(|x| {
                    order
                        .iter()
                        .copied()
                        .find(|&c| m.get(x, c) <= radius)
                        .expect("a point lies in its own ball")
                })
                .collect()
        }
    };
    Partition::from_assignment(m, rho, &assignment)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaddingEstimate {
    pub rho: f64,
    pub trials: usize,
    pub mean_pad: Vec<f64>,
    /// `min_x mean_pad[x] / rho`.
    pub delta_hat: f64,
}

/// Monte Carlo padding; trial `t` uses seed `derive_seed(seed, t)`.
pub fn measure_padding(
    m: &FiniteMetricSpace,
    rho: f64,
    scheme: DecompositionScheme,
    trials: usize,
    seed: u64,
) -> Result<PaddingEstimate> {
    check_rho(rho)?;
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut sum = vec![0.0; m.len()];
    for t in 0..trials {
        let p = padded_partition(m, rho, scheme, derive_seed(seed, t as u64))?;
        for (s, pad) in sum.iter_mut().zip(&p.pads) {
            *s += pad;
        }
    }
    let mean_pad: Vec<f64> = sum.iter().map(|s| s / trials as f64).collect();
    let delta_hat = mean_pad.iter().fold(f64::INFINITY, |a, &b| a.min(b)) / rho;
    Ok(PaddingEstimate { rho, trials, mean_pad, delta_hat })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{path_graph, shortest_path_metric};

    fn path(n: usize) -> FiniteMetricSpace {
        shortest_path_metric(&path_graph(n).unwrap()).unwrap()
    }

    fn equilateral(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_fn(None, n, |_, _| 1.0).unwrap()
    }

    #[test]
    fn clusters_are_small_and_pads_capped() {
        let m = path(20);
        for (rho, seed) in [(0.5, 1), (2.0, 2), (5.0, 3), (100.0, 4)] {
            let p = padded_partition(&m, rho, DecompositionScheme::CkrGeneral, seed).unwrap();
            let mut seen: Vec<usize> = p.clusters.concat();
            seen.sort();
            assert_eq!(seen, (0..20).collect::<Vec<_>>());
            for c in 0..p.len() {
                assert!(p.cluster_diameter(&m, c) <= rho);
            }
            for x in 0..20 {
                assert!(p.pads[x] <= rho);
                if p.len() > 1 {
                    assert!(p.pads[x] > 0.0);
                }
            }
        }
    }

    #[test]
    fn tiny_rho_gives_singletons() {
        let m = path(6);
        let p = padded_partition(&m, 0.9, DecompositionScheme::CkrGeneral, 7).unwrap();
        assert_eq!(p.len(), 6);
        assert!(p.pads.iter().all(|&x| x == 0.9));
    }

    #[test]
    fn huge_rho_gives_one_cluster_padded_at_rho() {
        let m = path(6);
        let p = padded_partition(&m, 40.0, DecompositionScheme::CkrGeneral, 7).unwrap();
        assert_eq!(p.len(), 1);
        assert!(p.pads.iter().all(|&x| x == 40.0));
    }

    #[test]
    fn singleton_scheme() {
        let m = path(4);
        let p = padded_partition(&m, 10.0, DecompositionScheme::SingletonFallback, 0).unwrap();
        assert_eq!(p.len(), 4);
        assert_eq!(p.pads, vec![1.0; 4]);
    }

    #[test]
    fn two_points() {
        let m = FiniteMetricSpace::from_fn(None, 2, |_, _| 3.0).unwrap();
        let est = measure_padding(&m, 1.5, DecompositionScheme::CkrGeneral, 50, 1).unwrap();
        assert_eq!(est.delta_hat, 1.0);
    }

    #[test]
    fn equilateral_slightly_above() {
        for n in 2..=5 {
            let est = measure_padding(&equilateral(n), 1.01, DecompositionScheme::CkrGeneral, 200, 2).unwrap();
            assert!(est.delta_hat > 0.0);
        }
        // rho = 2.5: a radius in [0.625, 1.25] reaches every point iff it is
        // at least 1 (probability 2/5); otherwise all points are singletons.
        let est = measure_padding(&equilateral(4), 2.5, DecompositionScheme::CkrGeneral, 20_000, 3).unwrap();
        let expect = 0.4 * 2.5 + 0.6 * 1.0;
        for &p in &est.mean_pad {
            assert!((p - expect).abs() < 0.05, "{p} vs {expect}");
        }
    }

    #[test]
    fn path_padding() {
        let est = measure_padding(&path(8), 2.0, DecompositionScheme::CkrGeneral, 10_000, 4).unwrap();
        assert!(est.mean_pad.iter().all(|&p| p >= 0.05 * 2.0), "{:?}", est.mean_pad);
    }

    #[test]
    fn deterministic() {
        let m = path(10);
        let a = padded_partition(&m, 3.0, DecompositionScheme::CkrGeneral, 9).unwrap();
        assert_eq!(a, padded_partition(&m, 3.0, DecompositionScheme::CkrGeneral, 9).unwrap());
    }
}
