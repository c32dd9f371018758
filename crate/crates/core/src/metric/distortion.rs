use serde::{Deserialize, Serialize};

use super::FiniteMetricSpace;
use crate::error::{Error, Result};

/// Pairwise expansion statistics of a map `src -> img` (points matched by index).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    /// Largest ratio `img/src` over unordered pairs.
    pub lipschitz: f64,
    /// Smallest ratio `img/src`.
    pub colipschitz: f64,
    /// `lipschitz / colipschitz`; infinite if some pair collapses.
    pub distortion: f64,
    /// Mean over pairs of `ratio^q`.
    pub avg_expansion: f64,
    pub q: f64,
}

impl DistortionReport {
    /// Ratio statistics over an explicit list of pair ratios.
    pub fn from_ratios(ratios: impl IntoIterator<Item = f64>, q: f64) -> Result<Self> {
        check_q(q)?;
        let mut lip = 0.0f64;
        let mut colip = f64::INFINITY;
        let mut sum = 0.0;
        let mut count = 0usize;
        for r in ratios {
            lip = lip.max(r);
            colip = colip.min(r);
            sum += r.powf(q);
            count += 1;
        }
        if count == 0 {
            return Err(Error::DegenerateInput("no pairs to compare".into()));
        }
        let distortion = if colip > 0.0 { lip / colip } else { f64::INFINITY };
        Ok(Self {
            lipschitz: lip,
            colipschitz: colip,
            distortion,
            avg_expansion: sum / count as f64,
            q,
        })
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("averaging exponent q = {q} outside (0, 1]")))
    }
}

/// Compares `img` against `src` over all pairs `i < j`.
pub fn distortion_report(src: &FiniteMetricSpace, img: &FiniteMetricSpace, q: f64) -> Result<DistortionReport> {
    if src.len() != img.len() {
        return Err(Error::ShapeError(format!(
            "source has {} points, image has {}",
            src.len(),
            img.len()
        )));
    }
    if src.len() < 2 {
        return Err(Error::DegenerateInput("distortion needs at least two points".into()));
    }
    if let Some((i, j)) = src.pairs().find(|&(i, j)| src.get(i, j) <= 0.0) {
        return Err(Error::DegenerateInput(format!("source distance between {i} and {j} is zero")));
    }
    DistortionReport::from_ratios(src.pairs().map(|(i, j)| img.get(i, j) / src.get(i, j)), q)
}
