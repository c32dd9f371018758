//! Numerical certificates for lower bounds on embedding distortion.

mod cube;
mod laakso;
mod walsh;

pub use cube::hypercube_concentration_check;
pub use laakso::{certify_laakso_embedding, stress_embedding, LaaksoStep};
pub use walsh::{heuristic_best_linear, walsh_bound, walsh_linear_distortion, SearchParams, WalshEvaluation};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::lp_distance;

/// Absolute tolerance on certificate bounds.
pub const CERTIFICATE_TOL: f64 = 1e-9;

/// A matrix acting on column vectors, from `l_p` to `l_target`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub matrix: Vec<Vec<f64>>,
    pub source_p: f64,
    #[serde(default = "two")]
    pub target_p: f64,
}

fn two() -> f64 {
    2.0
}

impl LinearMap {
    pub fn new(matrix: Vec<Vec<f64>>, source_p: f64) -> Result<Self> {
        let m = LinearMap { matrix, source_p, target_p: 2.0 };
        m.validate()?;
        Ok(m)
    }

    pub fn identity(d: usize, source_p: f64) -> Self {
        let matrix = (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        LinearMap { matrix, source_p, target_p: 2.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.source_dim();
        if self.matrix.is_empty() || d == 0 {
            return Err(Error::ShapeError("linear map needs m, d >= 1".into()));
        }
        if self.matrix.iter().any(|r| r.len() != d) {
            return Err(Error::ShapeError("ragged matrix".into()));
        }
        if self.matrix.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite matrix entry".into()));
        }
        Ok(())
    }

    pub fn source_dim(&self) -> usize {
        self.matrix.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// Passes when `achieved >= bound - tolerance`.
    AtLeast,
    /// Passes when `achieved <= bound + tolerance`.
    AtMost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// Final adjacent pair of a Laakso descent, with the chain that led to it.
    LaaksoChain { u: String, v: String, steps: Vec<LaaksoStep> },
    Pair { i: usize, j: usize },
    Vertex { index: usize, label: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateResult {
    pub bound: f64,
    pub achieved: f64,
    pub direction: Direction,
    pub tolerance: f64,
    pub witness: Witness,
    pub passed: bool,
}

impl CertificateResult {
    pub fn new(bound: f64, achieved: f64, direction: Direction, witness: Witness) -> Self {
        let passed = match direction {
            Direction::AtLeast => achieved >= bound - CERTIFICATE_TOL,
            Direction::AtMost => achieved <= bound + CERTIFICATE_TOL,
        };
        CertificateResult { bound, achieved, direction, tolerance: CERTIFICATE_TOL, witness, passed }
    }
}

fn check_p_short_diagonal(p: f64) -> Result<()> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("p = {p} outside (1, 2]")));
    }
    Ok(())
}

/// `RHS - LHS` of `|u-v|^2 + (p-1)|a-b|^2 <= |u-a|^2 + |a-v|^2 + |v-b|^2 + |b-u|^2`
/// in `l_p`, for the quadrilateral `u, a, v, b` with diagonals `(u, v)` and `(a, b)`.
pub fn short_diagonal_check(u: &[f64], v: &[f64], a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    Ok(short_diagonal_terms(u, v, a, b, p)?.0)
}

/// Residual divided by the right-hand side (zero when all points coincide).
pub fn short_diagonal_relative(u: &[f64], v: &[f64], a: &[f64], b: &[f64], p: f64) -> Result<f64> {
    let (residual, rhs) = short_diagonal_terms(u, v, a, b, p)?;
    Ok(if rhs > 0.0 { residual / rhs } else { residual })
}

fn short_diagonal_terms(u: &[f64], v: &[f64], a: &[f64], b: &[f64], p: f64) -> Result<(f64, f64)> {
    check_p_short_diagonal(p)?;
    let n = u.len();
    if v.len() != n || a.len() != n || b.len() != n {
        return Err(Error::ShapeError("quadruple points differ in dimension".into()));
    }
    let sq = |x: &[f64], y: &[f64]| lp_distance(x, y, p).powi(2);
    let lhs = sq(u, v) + (p - 1.0) * sq(a, b);
    let rhs = sq(u, a) + sq(a, v) + sq(v, b) + sq(b, u);
    Ok((rhs - lhs, rhs))
}

/// `sqrt(1 + (p - 1) i / 4)`: least distortion of `G_i` into `L_p`, `p` in `(1, 2]`.
pub fn laakso_lp_lowerbound(i: u32, p: f64) -> Result<f64> {
    check_p_short_diagonal(p)?;
    Ok((1.0 + (p - 1.0) * i as f64 / 4.0).sqrt())
}
