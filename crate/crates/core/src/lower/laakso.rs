use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{laakso_lp_lowerbound, CertificateResult, Direction, Witness};
use crate::error::{Error, Result};
use crate::graph::{laakso, shortest_path_metric, LaaksoRefinement};
use crate::metric::{FiniteMetricSpace, PointSet};
use crate::seed::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaaksoStep {
    pub level: u32,
    pub u: String,
    pub v: String,
    /// Normalized image distance over graph distance for this pair.
    pub expansion: f64,
    /// `sqrt(1 + (p - 1) level / 4)`.
    pub required: f64,
}

// Sides of the quadrilateral u, b, v, c as pairs of child copies.
const SIDES: [[usize; 2]; 4] = [[0, 1], [2, 5], [5, 4], [3, 0]];

/// Replays the inductive argument on a concrete image of `G_level`.
///
/// The image is first divided by its co-Lipschitz constant. Starting from
/// `(s, t)`, each step applies the short-diagonal inequality to the
/// quadrilateral `u, b, v, c` (diagonals `(u, v)` and `(b, c)`), keeps the most
/// expanded side, and then the more expanded of that side's two edges.
pub fn certify_laakso_embedding(level: u32, image: &PointSet) -> Result<CertificateResult> {
    let p = image.p();
    let bound = laakso_lp_lowerbound(level, p)?;
    let g = laakso(level)?;
    let m = shortest_path_metric(&g)?;
    if image.len() != m.len() {
        return Err(Error::ShapeError(format!("image has {} points, G_{level} has {} vertices", image.len(), m.len())));
    }
    let (mut colip, mut worst) = (f64::INFINITY, (0, 1));
    for (i, j) in m.pairs() {
        let r = image.distance(i, j) / m.get(i, j);
        if r < colip {
            colip = r;
            worst = (i, j);
        }
    }
    if !(colip > 0.0) {
        return Err(Error::PreconditionViolated(format!(
            "image collapses vertices '{}' and '{}'",
            m.labels()[worst.0],
            m.labels()[worst.1]
        )));
    }
    let expansion = |x: usize, y: usize| image.distance(x, y) / (colip * m.get(x, y));
    let refine = LaaksoRefinement::new(&g, level)?;
    let (mut u, mut v) = (refine.vertex("s")?, refine.vertex("t")?);
    let mut path = String::new();
    let step = |j: u32, u: usize, v: usize| LaaksoStep {
        level: j,
        u: m.labels()[u].clone(),
        v: m.labels()[v].clone(),
        expansion: expansion(u, v),
        required: (1.0 + (p - 1.0) * j as f64 / 4.0).sqrt(),
    };
    let mut steps = vec![step(0, u, v)];
    for j in 0..level {
        let [_, b, c, _] = refine.gadget(&path)?;
        let ends = [(u, b), (b, v), (v, c), (c, u)];
        let side = (0..4)
            .max_by(|&x, &y| expansion(ends[x].0, ends[x].1).total_cmp(&expansion(ends[y].0, ends[y].1)).then(y.cmp(&x)))
            .expect("four sides");
        let [k0, k1] = SIDES[side];
        let (e0, e1) = (refine.child(&path, u, v, k0)?, refine.child(&path, u, v, k1)?);
        let (k, (nu, nv)) = if expansion(e1.0, e1.1) > expansion(e0.0, e0.1) { (k1, e1) } else { (k0, e0) };
        path.push(char::from(b'0' + k as u8));
        u = nu;
        v = nv;
        steps.push(step(j + 1, u, v));
    }
    let achieved = expansion(u, v);
    let witness = Witness::LaaksoChain { u: m.labels()[u].clone(), v: m.labels()[v].clone(), steps };
    Ok(CertificateResult::new(bound, achieved, Direction::AtLeast, witness))
}

/// Metric MDS by stress majorization (SMACOF) from a Gaussian start.
pub fn stress_embedding(m: &FiniteMetricSpace, dim: usize, iterations: usize, seed: u64) -> Result<PointSet> {
    if dim == 0 || m.is_empty() {
        return Err(Error::InvalidParameter("need dim >= 1 and at least one point".into()));
    }
    let n = m.len();
    let mut r = rng(seed);
    let scale = m.diameter().max(1e-300);
    let mut x: Vec<f64> = (0..n * dim)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut r);
            scale * z
        })
        .collect();
    let mut next = vec![0.0; n * dim];
    for _ in 0..iterations {
        next.fill(0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let cur = crate::metric::lp_distance(&x[i * dim..(i + 1) * dim], &x[j * dim..(j + 1) * dim], 2.0);
                if cur > 0.0 {
                    let w = m.get(i, j) / cur;
                    for k in 0..dim {
                        next[i * dim + k] += w * (x[i * dim + k] - x[j * dim + k]);
                    }
                }
            }
        }
        for v in next.iter_mut() {
            *v /= n as f64;
        }
        std::mem::swap(&mut x, &mut next);
    }
    PointSet::from_flat(2.0, dim, x)
}
