use super::{CertificateResult, Direction, Witness};
use crate::error::{Error, Result};

/// Concentration of a 1-Lipschitz function on the Hamming cube `{0,1}^k`.
///
/// `coords[x]` is the value at the vertex whose bits are `x`. Passes iff
/// `P(|f - E f| >= k / (4 alpha)) <= 2 exp(-k / (32 alpha^2))` under the uniform measure.
pub fn hypercube_concentration_check(coords: &[f64], alpha: f64) -> Result<CertificateResult> {
    let n = coords.len();
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::ShapeError(format!("{n} values do not index a cube of dimension >= 1")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha = {alpha} must be positive")));
    }
    let k = n.trailing_zeros();
    for x in 0..n {
        for b in 0..k {
            let y = x ^ (1 << b);
            if y > x && (coords[x] - coords[y]).abs() > 1.0 + 1e-12 {
                return Err(Error::PreconditionViolated(format!(
                    "not 1-Lipschitz on edge ({x}, {y}): |{} - {}| > 1",
                    coords[x], coords[y]
                )));
            }
        }
    }
    let mean = coords.iter().sum::<f64>() / n as f64;
    let t = k as f64 / (4.0 * alpha);
    let far = coords.iter().filter(|&&f| (f - mean).abs() >= t).count();
    let (index, _) = coords
        .iter()
        .enumerate()
        .map(|(i, f)| (i, (f - mean).abs()))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let label = format!("{index:0width$b}", width = k as usize);
    let bound = 2.0 * (-(k as f64) / (32.0 * alpha * alpha)).exp();
    Ok(CertificateResult::new(bound, far as f64 / n as f64, Direction::AtMost, Witness::Vertex { index, label }))
}
