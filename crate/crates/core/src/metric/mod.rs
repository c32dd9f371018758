//! Finite metric spaces, point sets in `l_p`, distortion and doubling.

mod distortion;
mod doubling;
mod points;

pub use distortion::{distortion_report, DistortionReport};
pub use doubling::{doubling_constant, CoverMode, MAX_EXACT_POINTS};
pub use points::{lp_distance, lp_norm, metric_from_points, PointSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used for triangle-inequality checks.
pub const TRIANGLE_RTOL: f64 = 1e-9;

/// Largest point count for which a dense distance matrix is materialized.
pub const MAX_METRIC_POINTS: usize = 4096;

/// A way in which a distance matrix fails to be a metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonFinite { i: usize, j: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    NonzeroDiagonal { i: usize, value: f64 },
    Asymmetric { i: usize, j: usize, residual: f64 },
    ZeroDistance { i: usize, j: usize },
    /// `d(i,k) > d(i,j) + d(j,k)`; `residual` is the excess.
    Triangle { i: usize, j: usize, k: usize, residual: f64 },
}

/// Labeled points with an explicit distance matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MetricFile", into = "MetricFile")]
pub struct FiniteMetricSpace {
    labels: Vec<String>,
    n: usize,
    dist: Vec<f64>,
}

/// On-disk layout: `{"labels": [...], "dist": [[...]]}`; labels default to indices.
#[derive(Serialize, Deserialize)]
struct MetricFile {
    #[serde(default)]
    labels: Vec<String>,
    dist: Vec<Vec<f64>>,
}

impl TryFrom<MetricFile> for FiniteMetricSpace {
    type Error = Error;

    fn try_from(file: MetricFile) -> Result<Self> {
        let labels = if file.labels.is_empty() { default_labels(file.dist.len()) } else { file.labels };
        FiniteMetricSpace::from_rows(labels, file.dist)
    }
}

impl From<FiniteMetricSpace> for MetricFile {
    fn from(m: FiniteMetricSpace) -> Self {
        let dist = (0..m.n).map(|i| m.row(i).to_vec()).collect();
        MetricFile { labels: m.labels, dist }
    }
}

fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| i.to_string()).collect()
}

impl FiniteMetricSpace {
    /// Builds a metric and checks every invariant.
    pub fn new(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(labels, dist)?.validated()
    }

    /// Shape checks only; use [`violations`](Self::violations) to inspect the rest.
    pub fn from_rows(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(Error::ShapeError("metric has no points".into()));
        }
        if labels.len() != n {
            return Err(Error::ShapeError(format!(
                "{} labels for a {n}x{n} matrix",
                labels.len()
            )));
        }
        if let Some((i, row)) = dist.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::ShapeError(format!(
                "row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        Ok(Self {
            labels,
            n,
            dist: dist.into_iter().flatten().collect(),
        })
    }

    /// Row-major `n*n` matrix; shape checks only.
    pub fn from_flat(labels: Option<Vec<String>>, n: usize, dist: Vec<f64>) -> Result<Self> {
        if n == 0 || dist.len() != n * n {
            return Err(Error::ShapeError(format!(
                "flat matrix of length {} is not {n}x{n}",
                dist.len()
            )));
        }
        let labels = labels.unwrap_or_else(|| default_labels(n));
        if labels.len() != n {
            return Err(Error::ShapeError(format!("{} labels for {n} points", labels.len())));
        }
        Ok(Self { labels, n, dist })
    }

    /// Builds a symmetric matrix from `f(i, j)` evaluated on `i < j`.
    pub fn from_fn(labels: Option<Vec<String>>, n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        if n > MAX_METRIC_POINTS {
            return Err(Error::ResourceLimit(format!(
                "{n} points exceeds the dense-matrix limit {MAX_METRIC_POINTS}"
            )));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Self::from_flat(labels, n, dist)
    }

    pub fn validated(self) -> Result<Self> {
        let v = self.violations();
        if v.is_empty() {
            Ok(self)
        } else {
            Err(Error::InvalidMetric(v))
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// All unordered pairs `i < j` in lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
    }

    pub fn diameter(&self) -> f64 {
        self.pairs().map(|(i, j)| self.get(i, j)).fold(0.0, f64::max)
    }

    /// Smallest off-diagonal entry, `None` for a single point.
    pub fn min_positive_distance(&self) -> Option<f64> {
        self.pairs()
            .map(|(i, j)| self.get(i, j))
            .filter(|&d| d > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Every invariant failure. Triangle checks read the upper triangle only,
    /// so one asymmetric entry yields exactly one violation.
    pub fn violations(&self) -> Vec<Violation> {
        let n = self.n;
        let mut out = Vec::new();
        for i in 0..n {
            let dii = self.get(i, i);
            if dii != 0.0 {
                out.push(Violation::NonzeroDiagonal { i, value: dii });
            }
        }
        for (i, j) in self.pairs() {
            for (a, b) in [(i, j), (j, i)] {
                let v = self.get(a, b);
                if !v.is_finite() {
                    out.push(Violation::NonFinite { i: a, j: b, value: v });
                } else if v < 0.0 {
                    out.push(Violation::Negative { i: a, j: b, value: v });
                }
            }
            let (u, l) = (self.get(i, j), self.get(j, i));
            if u != l {
                out.push(Violation::Asymmetric { i, j, residual: (u - l).abs() });
            }
            if u == 0.0 {
                out.push(Violation::ZeroDistance { i, j });
            }
        }
        let up = |a: usize, b: usize| if a < b { self.get(a, b) } else { self.get(b, a) };
        for i in 0..n {
            for k in i + 1..n {
                let dik = up(i, k);
                for j in 0..n {
                    if j == i || j == k {
                        continue;
                    }
                    let via = up(i, j) + up(j, k);
                    let residual = dik - via;
                    if residual > TRIANGLE_RTOL * dik.max(via) {
                        out.push(Violation::Triangle { i, j, k, residual });
                    }
                }
            }
        }
        out
    }

    /// Applies `f` to every off-diagonal entry.
    pub fn map_distances(&self, f: impl Fn(f64) -> f64) -> Self {
        let n = self.n;
        let mut dist = self.dist.clone();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    dist[i * n + j] = f(dist[i * n + j]);
                }
            }
        }
        Self { labels: self.labels.clone(), n, dist }
    }

    /// `out[a][b] = self[perm[a]][perm[b]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::ShapeError("permutation length".into()));
        }
        let labels = perm.iter().map(|&p| self.labels[p].clone()).collect();
        let n = self.n;
        let dist = (0..n * n).map(|ab| self.get(perm[ab / n], perm[ab % n])).collect();
        Ok(Self { labels, n, dist })
    }

    /// Restriction to `idx` (in that order).
    pub fn submetric(&self, idx: &[usize]) -> Self {
        let n = idx.len();
        let labels = idx.iter().map(|&p| self.labels[p].clone()).collect();
        let dist = (0..n * n).map(|ab| self.get(idx[ab / n], idx[ab % n])).collect();
        Self { labels, n, dist }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map_distances(|d| d * factor)
    }
}

/// Free-function form of [`FiniteMetricSpace::violations`].
pub fn validate_metric(m: &FiniteMetricSpace) -> Vec<Violation> {
    m.violations()
}

/// The `1 - eps` snowflake: every distance `d` becomes `d^(1 - eps)`.
pub fn snowflake(m: &FiniteMetricSpace, eps: f64) -> Result<FiniteMetricSpace> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("snowflake eps {eps} outside [0, 1)")));
    }
    if eps == 0.0 {
        return Ok(m.clone());
    }
    let e = 1.0 - eps;
    Ok(m.map_distances(|d| d.powf(e)))
}
