//! Random linear maps from l_p into l_2 built from a truncated LePage series.
//!
//! For fixed latent data the Gaussian multipliers are integrated out, so the
//! image of `x` has coordinates `C * Gamma_j^(-1/p) * f(Y_j)` where `f` is the
//! step function of `x` on `[0, 1)` (value `x_l * d^(1/p)` on the `l`-th of
//! `d` equal intervals).

mod calibrate;
mod law;
mod theorem1;

pub use calibrate::{calibrate_c, Calibration, CALIBRATION_AS, CALIBRATION_TOLERANCE};
pub use law::{ratio_cdf_p1, ratio_density_p1, ratio_moment_p1, ratio_quantile_p1};
pub use theorem1::{embed_theorem1, theorem1_threshold, Theorem1Embedding, Theorem1Params};

use rand::Rng as _;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::PointSet;
use crate::seed::{derive_seed, rng, Rng};

/// Default truncation length for p = 1.
pub const DEFAULT_J: usize = 10_000;

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (0, 2]")));
    }
    Ok(())
}

fn check_common(p: f64, d: usize, j: usize, c: f64) -> Result<()> {
    check_p(p)?;
    if d == 0 {
        return Err(Error::InvalidParameter("dimension d must be at least 1".into()));
    }
    if j == 0 {
        return Err(Error::InvalidParameter("truncation J must be at least 1".into()));
    }
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidParameter(format!("C = {c} must be positive and finite")));
    }
    Ok(())
}

// The Gamma and Y sequences come from two independent streams so that
// one-dimensional sampling can skip the uniforms entirely.
fn streams(seed: u64) -> (Rng, Rng) {
    (rng(derive_seed(seed, 0)), rng(derive_seed(seed, 1)))
}

#[inline]
fn gamma_power(gamma: f64, p: f64) -> f64 {
    // Gamma^(-2/p)
    if p == 1.0 {
        1.0 / (gamma * gamma)
    } else if p == 2.0 {
        1.0 / gamma
    } else {
        gamma.powf(-2.0 / p)
    }
}

#[inline]
fn column(y: f64, d: usize) -> usize {
    ((y * d as f64) as usize).min(d - 1)
}

/// A sampled operator: latent sequences plus the realized sparse J x d matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "OperatorFile", into = "OperatorFile")]
pub struct StableOperator {
    p: f64,
    d: usize,
    c: f64,
    seed: u64,
    gammas: Vec<f64>,
    ys: Vec<f64>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct OperatorFile {
    p: f64,
    d: usize,
    #[serde(rename = "J")]
    j: usize,
    #[serde(rename = "C")]
    c: f64,
    seed: u64,
    gammas: Vec<f64>,
    ys: Vec<f64>,
}

impl From<StableOperator> for OperatorFile {
    fn from(t: StableOperator) -> Self {
        OperatorFile { p: t.p, d: t.d, j: t.gammas.len(), c: t.c, seed: t.seed, gammas: t.gammas, ys: t.ys }
    }
}

impl TryFrom<OperatorFile> for StableOperator {
    type Error = Error;

    fn try_from(f: OperatorFile) -> Result<Self> {
        if f.gammas.len() != f.j || f.ys.len() != f.j {
            return Err(Error::ShapeError(format!(
                "J = {} but {} gammas and {} ys",
                f.j,
                f.gammas.len(),
                f.ys.len()
            )));
        }
        StableOperator::from_latents(f.p, f.d, f.c, f.seed, f.gammas, f.ys)
    }
}

impl StableOperator {
    /// Rebuilds the matrix from latent sequences, validating them.
    pub fn from_latents(p: f64, d: usize, c: f64, seed: u64, gammas: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_common(p, d, gammas.len(), c)?;
        if gammas.len() != ys.len() {
            return Err(Error::ShapeError("gammas and ys differ in length".into()));
        }
        if !(gammas[0] > 0.0) || gammas.windows(2).any(|w| !(w[1] > w[0])) || !gammas.iter().all(|g| g.is_finite()) {
            return Err(Error::InvalidParameter("gammas must be positive, finite and strictly increasing".into()));
        }
        if ys.iter().any(|y| !(0.0..1.0).contains(y)) {
            return Err(Error::InvalidParameter("ys must lie in [0, 1)".into()));
        }
        let scale = c * (d as f64).powf(1.0 / p);
        let cols = ys.iter().map(|&y| column(y, d)).collect();
        let values = gammas.iter().map(|&g| scale * g.powf(-1.0 / p)).collect();
        Ok(StableOperator { p, d, c, seed, gammas, ys, cols, values })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Truncation length J (number of output coordinates).
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Row `j` as (column, value); every other entry of the row is zero.
    pub fn row_entry(&self, j: usize) -> (usize, f64) {
        (self.cols[j], self.values[j])
    }

    /// Dense J x d matrix.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        (0..self.len())
            .map(|j| {
                let mut row = vec![0.0; self.d];
                row[self.cols[j]] = self.values[j];
                row
            })
            .collect()
    }

    /// Image of a single vector of length d.
    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::ShapeError(format!("vector of length {} for operator on dimension {}", x.len(), self.d)));
        }
        Ok(self.cols.iter().zip(&self.values).map(|(&c, &v)| v * x[c]).collect())
    }
}

/// Samples an operator; identical seeds give identical operators.
pub fn sample_operator(p: f64, d: usize, j: usize, c: f64, seed: u64) -> Result<StableOperator> {
    check_common(p, d, j, c)?;
    let (mut rg, mut ry) = streams(seed);
    let mut gammas = Vec::with_capacity(j);
    let mut ys = Vec::with_capacity(j);
    let mut g = 0.0;
    for _ in 0..j {
        let theta: f64 = rg.sample(Exp1);
        g += theta;
        gammas.push(g);
        ys.push(ry.random::<f64>());
    }
    StableOperator::from_latents(p, d, c, seed, gammas, ys)
}

/// Applies the operator row-wise; the result lives in l_2.
pub fn apply(t: &StableOperator, ps: &PointSet) -> Result<PointSet> {
    if ps.p() != t.p {
        return Err(Error::ShapeError(format!("point set has p = {} but operator has p = {}", ps.p(), t.p)));
    }
    if ps.dim() != t.d {
        return Err(Error::ShapeError(format!("point set has dimension {} but operator has {}", ps.dim(), t.d)));
    }
    let mut out = Vec::with_capacity(ps.len() * t.len());
    for row in ps.rows() {
        out.extend(t.cols.iter().zip(&t.values).map(|(&c, &v)| v * row[c]));
    }
    PointSet::from_flat(2.0, t.len(), out)
}

/// Samples of `X = ||T x||_2 / ||x||_p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSample {
    pub values: Vec<f64>,
}

impl RatioSample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean_of(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.values.iter().map(|&x| f(x)).sum::<f64>() / self.values.len() as f64
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

/// `||T x||_2^2 / C^2` for the operator with the given seed, without materializing it.
fn unscaled_square(p: f64, x: &[f64], j: usize, seed: u64) -> f64 {
    let d = x.len();
    let (mut rg, mut ry) = streams(seed);
    let scale = (d as f64).powf(2.0 / p);
    let mut g = 0.0;
    let mut s = 0.0;
    for _ in 0..j {
        let theta: f64 = rg.sample(Exp1);
        g += theta;
        let f = if d == 1 {
            x[0]
        } else {
            x[column(ry.random::<f64>(), d)]
        };
        s += gamma_power(g, p) * f * f;
    }
    s * scale
}

fn unit_test_vector(p: f64, x: &[f64]) -> Result<Vec<f64>> {
    let norm = crate::metric::lp_norm(x, p);
    if x.is_empty() || !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::DegenerateInput("test vector must be nonzero and finite".into()));
    }
    Ok(x.iter().map(|v| v / norm).collect())
}

/// Squared ratios `X^2 / C^2`, sample `k` drawn with seed `derive_seed(seed, k)`.
pub(crate) fn unscaled_squares(p: f64, x: &[f64], j: usize, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    check_common(p, x.len().max(1), j, 1.0)?;
    let u = unit_test_vector(p, x)?;
    Ok((0..n_samples).map(|k| unscaled_square(p, &u, j, derive_seed(seed, k as u64))).collect())
}

/// Draws `n_samples` ratios; sample `k` uses the operator `sample_operator(p, d, J, C, derive_seed(seed, k))`.
pub fn sample_ratios(p: f64, x: &[f64], j: usize, c: f64, n_samples: usize, seed: u64) -> Result<RatioSample> {
    check_common(p, x.len().max(1), j, c)?;
    let values = unscaled_squares(p, x, j, n_samples, seed)?.into_iter().map(|s| c * s.sqrt()).collect();
    Ok(RatioSample { values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::lp_norm;

    #[test]
    fn one_nonzero_per_row_at_the_right_column() {
        let t = sample_operator(1.0, 7, 200, 0.5, 3).unwrap();
        for (j, row) in t.matrix().iter().enumerate() {
            let nz: Vec<usize> = (0..7).filter(|&l| row[l] != 0.0).collect();
            assert_eq!(nz, vec![(7.0 * t.ys()[j]).floor() as usize]);
            let expect = 0.5 * t.gammas()[j].recip() * 7.0;
            assert!((row[nz[0]] - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn p1_magnitudes_decrease() {
        let t = sample_operator(1.0, 3, 500, 1.0, 9).unwrap();
        let mags: Vec<f64> = (0..t.len()).map(|j| t.row_entry(j).1).collect();
        assert!(mags.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn deterministic_and_round_trips() {
        let a = sample_operator(1.5, 4, 64, 0.7, 11).unwrap();
        assert_eq!(a, sample_operator(1.5, 4, 64, 0.7, 11).unwrap());
        assert_ne!(a, sample_operator(1.5, 4, 64, 0.7, 12).unwrap());
        let json = serde_json::to_string(&a).unwrap();
        assert!(json.contains("\"J\":64") && json.contains("\"C\":0.7"));
        let b: StableOperator = serde_json::from_str(&json).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(sample_operator(0.0, 2, 3, 1.0, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(sample_operator(2.5, 2, 3, 1.0, 0), Err(Error::InvalidParameter(_))));
        let t = sample_operator(1.0, 2, 3, 1.0, 0).unwrap();
        let ps = PointSet::new(1.0, vec![vec![1.0, 2.0, 3.0]]).unwrap();
        assert!(matches!(apply(&t, &ps), Err(Error::ShapeError(_))));
        let ps = PointSet::new(2.0, vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(apply(&t, &ps), Err(Error::ShapeError(_))));
        let bad = r#"{"p":1.0,"d":2,"J":2,"C":1.0,"seed":0,"gammas":[2.0,1.0],"ys":[0.1,0.2]}"#;
        assert!(serde_json::from_str::<StableOperator>(bad).is_err());
    }

    #[test]
    fn linear_on_points() {
        let t = sample_operator(1.0, 3, 100, 1.0, 5).unwrap();
        let x = [1.0, -2.0, 0.5];
        let y = [0.25, 4.0, -1.0];
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let ps = PointSet::new(1.0, vec![x.to_vec(), y.to_vec(), sum, vec![0.0; 3], x.iter().map(|v| 2.0 * v).collect()])
            .unwrap();
        let img = apply(&t, &ps).unwrap();
        for j in 0..t.len() {
            assert_eq!(img.row(2)[j], img.row(0)[j] + img.row(1)[j]);
            assert_eq!(img.row(3)[j], 0.0);
            assert_eq!(img.row(4)[j], 2.0 * img.row(0)[j]);
        }
    }

    #[test]
    fn streaming_ratios_match_materialized_operators() {
        for (p, x) in [(1.0, vec![1.0, -3.0, 2.0]), (1.0, vec![2.5]), (1.3, vec![0.5, 0.5])] {
            let s = sample_ratios(p, &x, 300, 0.6, 5, 77).unwrap();
            for k in 0..5 {
                let t = sample_operator(p, x.len(), 300, 0.6, derive_seed(77, k as u64)).unwrap();
                let r = lp_norm(&t.apply_vec(&x).unwrap(), 2.0) / lp_norm(&x, p);
                assert!((r - s.values[k]).abs() <= 1e-12 * r, "{r} vs {}", s.values[k]);
            }
        }
    }

    #[test]
    fn ratio_is_scale_free() {
        let a = sample_ratios(1.0, &[1.0, 2.0], 100, 1.0, 20, 4).unwrap();
        let b = sample_ratios(1.0, &[2.0, 4.0], 100, 1.0, 20, 4).unwrap();
        for (u, v) in a.values.iter().zip(&b.values) {
            assert!((u - v).abs() <= 1e-14 * u);
        }
    }
}
