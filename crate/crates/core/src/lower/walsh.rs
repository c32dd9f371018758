use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::LinearMap;
use crate::error::{Error, Result};
use crate::graph::walsh_pointset;
use crate::metric::{lp_distance, DistortionReport, PointSet};
use crate::seed::{derive_seed, rng};

/// Largest Walsh order accepted by [`walsh_linear_distortion`].
pub const MAX_EVALUATED_ORDER: u32 = 8;

/// `((n - 1)/2)^|1/p - 1/2|`: least distortion of any linear map from the Walsh set into `L_2`.
pub fn walsh_bound(n: usize, p: f64) -> f64 {
    ((n as f64 - 1.0) / 2.0).powf((1.0 / p - 0.5).abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalshEvaluation {
    pub k: u32,
    pub n: usize,
    pub report: DistortionReport,
    pub bound: f64,
    /// `|sum_i |T w_i|^2 - 2^k sum_j |T e_j|^2| / (2^k sum_j |T e_j|^2)`.
    pub residual: f64,
}

fn walsh_order(a: &PointSet) -> Result<u32> {
    let d = a.dim();
    if !d.is_power_of_two() || a.len() != 2 * d + 1 {
        return Err(Error::ShapeError(format!("{} points in dimension {d} is not a Walsh point set", a.len())));
    }
    let k = d.trailing_zeros();
    if k > MAX_EVALUATED_ORDER {
        return Err(Error::ResourceLimit(format!("Walsh order {k} above {MAX_EVALUATED_ORDER}")));
    }
    if walsh_pointset(k, a.p())?.coords() != a.coords() {
        return Err(Error::ShapeError("points are not origin, Walsh rows, basis vectors".into()));
    }
    Ok(k)
}

fn pair_ratios(images: &[Vec<f64>], a: &PointSet, p: f64) -> Vec<f64> {
    let n = a.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(lp_distance(&images[i], &images[j], 2.0) / lp_distance(a.row(i), a.row(j), p));
        }
    }
    out
}

/// Distortion of `T` restricted to the Walsh set, and the Parseval certificate residual.
pub fn walsh_linear_distortion(t: &LinearMap, a: &PointSet, p: f64) -> Result<WalshEvaluation> {
    t.validate()?;
    let k = walsh_order(a)?;
    let d = a.dim();
    if t.source_dim() != d {
        return Err(Error::ShapeError(format!("map acts on dimension {}, points live in {d}", t.source_dim())));
    }
    let images: Vec<Vec<f64>> = a.rows().map(|x| t.apply(x)).collect();
    let report = DistortionReport::from_ratios(pair_ratios(&images, a, p), 0.5)?;
    let sq = |v: &Vec<f64>| v.iter().map(|x| x * x).sum::<f64>();
    let walsh: f64 = images[1..=d].iter().map(sq).sum();
    let basis: f64 = d as f64 * images[d + 1..].iter().map(sq).sum::<f64>();
    let residual = if basis > 0.0 { (walsh - basis).abs() / basis } else { walsh };
    Ok(WalshEvaluation { k, n: a.len(), report, bound: walsh_bound(a.len(), p), residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    pub iterations: usize,
    pub restarts: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl SearchParams {
    pub fn new(seed: u64) -> Self {
        SearchParams { iterations: 1500, restarts: 20, learning_rate: 0.02, seed }
    }
}

struct Problem {
    d: usize,
    diffs: Vec<Vec<f64>>,
    log_norms: Vec<f64>,
}

impl Problem {
    fn log_ratios(&self, t: &[f64], images: &mut [Vec<f64>]) -> Vec<f64> {
        let d = self.d;
        self.diffs
            .iter()
            .zip(images.iter_mut())
            .zip(&self.log_norms)
            .map(|((x, y), ln)| {
                for (r, out) in y.iter_mut().enumerate() {
                    *out = t[r * d..(r + 1) * d].iter().zip(x).map(|(a, b)| a * b).sum();
                }
                0.5 * y.iter().map(|v| v * v).sum::<f64>().ln() - ln
            })
            .collect()
    }
}

fn softmax(v: &[f64], scale: f64) -> Vec<f64> {
    let m = v.iter().map(|x| x * scale).fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x * scale - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn spread(l: &[f64]) -> f64 {
    let (lo, hi) = l.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    hi - lo
}

/// One Adam run on the soft log-distortion; returns the best matrix seen and its log distortion.
fn descend(problem: &Problem, mut t: Vec<f64>, params: &SearchParams) -> (Vec<f64>, f64) {
    let d = problem.d;
    let frob = (d as f64).sqrt();
    let renorm = |t: &mut Vec<f64>| {
        let f = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        if f > 0.0 {
            t.iter_mut().for_each(|x| *x *= frob / f);
        }
    };
    renorm(&mut t);
    let mut images = vec![vec![0.0; d]; problem.diffs.len()];
    let (mut m1, mut m2) = (vec![0.0; d * d], vec![0.0; d * d]);
    let (b1, b2) = (0.9f64, 0.999f64);
    let mut best = (t.clone(), f64::INFINITY);
    let steps = params.iterations.max(1);
    for it in 0..steps {
        let l = problem.log_ratios(&t, &mut images);
        let s = spread(&l);
        if s.is_nan() {
            break;
        }
        if s < best.1 {
            best = (t.clone(), s);
        }
        let tau = if steps > 1 { 1e-3f64.powf(it as f64 / (steps - 1) as f64) } else { 1e-3 };
        let wp = softmax(&l, 1.0 / tau);
        let wm = softmax(&l, -1.0 / tau);
        let mut g = vec![0.0; d * d];
        for ((y, x), (a, b)) in images.iter().zip(&problem.diffs).zip(wp.iter().zip(&wm)) {
            let w = a - b;
            if w == 0.0 {
                continue;
            }
            let c = w / y.iter().map(|v| v * v).sum::<f64>().max(1e-300);
            for r in 0..d {
                let cy = c * y[r];
                if cy != 0.0 {
                    for (gj, xj) in g[r * d..(r + 1) * d].iter_mut().zip(x) {
                        *gj += cy * xj;
                    }
                }
            }
        }
        let step = (it + 1) as i32;
        for i in 0..d * d {
            m1[i] = b1 * m1[i] + (1.0 - b1) * g[i];
            m2[i] = b2 * m2[i] + (1.0 - b2) * g[i] * g[i];
            let mh = m1[i] / (1.0 - b1.powi(step));
            let vh = m2[i] / (1.0 - b2.powi(step));
            t[i] -= params.learning_rate * mh / (vh.sqrt() + 1e-12);
        }
        renorm(&mut t);
    }
    let l = problem.log_ratios(&t, &mut images);
    let s = spread(&l);
    if s < best.1 {
        best = (t, s);
    }
    best
}

/// Searches for a square linear map of least distortion on `a` (pairwise differences,
/// norm `p` at the source, `l_2` at the target). Restart 0 starts at the identity,
/// restart `r > 0` at a Gaussian matrix seeded by `derive_seed(seed, r)`.
pub fn heuristic_best_linear(a: &PointSet, p: f64, params: &SearchParams) -> Result<(LinearMap, DistortionReport)> {
    if a.len() < 2 {
        return Err(Error::DegenerateInput("need at least two points".into()));
    }
    if params.restarts == 0 || !(params.learning_rate > 0.0) {
        return Err(Error::InvalidParameter("need restarts >= 1 and a positive learning rate".into()));
    }
    let d = a.dim();
    let mut diffs = Vec::new();
    let mut log_norms = Vec::new();
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let x: Vec<f64> = a.row(i).iter().zip(a.row(j)).map(|(u, v)| u - v).collect();
            let norm = crate::metric::lp_norm(&x, p);
            if norm == 0.0 {
                return Err(Error::DegenerateInput(format!("points {i} and {j} coincide")));
            }
            log_norms.push(norm.ln());
            diffs.push(x);
        }
    }
    let problem = Problem { d, diffs, log_norms };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for r in 0..params.restarts {
        let start: Vec<f64> = if r == 0 {
            (0..d * d).map(|i| if i / d == i % d { 1.0 } else { 0.0 }).collect()
        } else {
            let mut g = rng(derive_seed(params.seed, r as u64));
            (0..d * d).map(|_| StandardNormal.sample(&mut g)).collect()
        };
        let found = descend(&problem, start, params);
        if best.as_ref().is_none_or(|b| found.1 < b.1) {
            best = Some(found);
        }
    }
    let (t, _) = best.expect("at least one restart");
    let map = LinearMap::new(t.chunks(d).map(<[f64]>::to_vec).collect(), p)?;
    let images: Vec<Vec<f64>> = a.rows().map(|x| map.apply(x)).collect();
    let report = DistortionReport::from_ratios(pair_ratios(&images, a, p), 0.5)?;
    Ok((map, report))
}
