use serde::{Deserialize, Serialize};

use super::{check_p, unscaled_squares};
use crate::error::{Error, Result};

/// Laplace-transform arguments used by the calibration objective.
pub const CALIBRATION_AS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Largest acceptable discrepancy at the optimum.
pub const CALIBRATION_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub p: f64,
    #[serde(rename = "J")]
    pub j: usize,
    pub n_samples: usize,
    pub seed: u64,
    #[serde(rename = "C")]
    pub c: f64,
    /// `max_a |mean(e^(-a X^2)) - e^(-a^(p/2))|` at the returned C.
    pub discrepancy: f64,
}

/// `max_a |mean(exp(-a c^2 s)) - exp(-a^(p/2))|` over the fixed grid of a.
pub fn laplace_discrepancy(squares: &[f64], c: f64, p: f64) -> f64 {
    let n = squares.len() as f64;
    CALIBRATION_AS
        .iter()
        .map(|&a| {
            let k = a * c * c;
            let mean = squares.iter().map(|&s| (-k * s).exp()).sum::<f64>() / n;
            (mean - (-a.powf(p / 2.0)).exp()).abs()
        })
        .fold(0.0, f64::max)
}

/// Picks C so that `E e^(-a X^2) = e^(-a^(p/2))` holds as closely as possible
/// on Monte Carlo samples of a unit test vector in dimension 1.
pub fn calibrate_c(p: f64, j: usize, n_samples: usize, seed: u64) -> Result<Calibration> {
    check_p(p)?;
    if n_samples == 0 {
        return Err(Error::InvalidParameter("calibration needs at least one sample".into()));
    }
    let squares = unscaled_squares(p, &[1.0], j, n_samples, seed)?;
    let objective = |log_c: f64| laplace_discrepancy(&squares, log_c.exp(), p);

    // Coarse grid in log C over [1e-3, 1e3], then golden section around the best node.
    let (lo, hi, steps) = (-3.0 * std::f64::consts::LN_10, 3.0 * std::f64::consts::LN_10, 120);
    let h = (hi - lo) / steps as f64;
    let best = (0..=steps)
        .map(|i| (i, objective(lo + h * i as f64)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let (mut a, mut b) = (lo + h * (best as f64 - 1.0), lo + h * (best as f64 + 1.0));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut f1, mut f2) = (objective(x1), objective(x2));
    for _ in 0..80 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = objective(x2);
        }
    }
    let (log_c, discrepancy) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let c = log_c.exp();
    if discrepancy > CALIBRATION_TOLERANCE {
        return Err(Error::CalibrationFailed { c, discrepancy });
    }
    Ok(Calibration { p, j, n_samples, seed, c, discrepancy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    #[test]
    fn p1_close_to_closed_form() {
        // Known constant for the LePage representation: Gamma(1 - p/2)^(-1/p).
        let cal = calibrate_c(1.0, 2000, 20_000, 1).unwrap();
        let want = 1.0 / gamma(0.5);
        assert!((cal.c - want).abs() < 0.03 * want, "{} vs {want}", cal.c);
        assert!(cal.discrepancy < 0.01);
    }

    #[test]
    fn other_exponents() {
        for p in [0.5, 1.5] {
            let cal = calibrate_c(p, 2000, 10_000, 2).unwrap();
            let want = gamma(1.0 - p / 2.0).powf(-1.0 / p);
            assert!((cal.c - want).abs() < 0.05 * want, "p = {p}: {} vs {want}", cal.c);
        }
    }

    #[test]
    fn p2_concentrates_slowly() {
        // At p = 2 the sum of 1/Gamma_j grows like ln J, so X^2 / median
        // tightens only at rate 1/ln J; the Laplace fit improves with J.
        let spread = |j: usize| {
            let mut s = unscaled_squares(2.0, &[1.0], j, 400, 3).unwrap();
            s.sort_by(f64::total_cmp);
            let med = s[200];
            let c = med.sqrt().recip();
            ((s[300] - s[100]) / med, laplace_discrepancy(&s, c, 2.0))
        };
        let (iqr_small, fit_small) = spread(100);
        let (iqr_large, fit_large) = spread(100_000);
        assert!(iqr_large < 0.7 * iqr_small, "{iqr_small} -> {iqr_large}");
        assert!(fit_large < fit_small, "{fit_small} -> {fit_large}");
        assert!(fit_large < 0.05);
    }

    #[test]
    fn rejects_bad_p() {
        assert!(matches!(calibrate_c(3.0, 10, 10, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn failure_is_reported() {
        // Two samples cannot match five Laplace values.
        match calibrate_c(1.0, 5, 2, 0) {
            Err(Error::CalibrationFailed { discrepancy, .. }) => assert!(discrepancy > 0.01),
            other => panic!("{other:?}"),
        }
    }
}
