//! The p = 1 ratio law, density `e^(-1/(4x^2)) / (x^2 sqrt(pi))`, and
//! quantities obtained from it by quadrature.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::numerics::{integrate, integrate_positive_axis};

const QUAD_TOL: f64 = 1e-14;

fn density(x: f64) -> f64 {
    if x < 1e-3 {
        return 0.0;
    }
    (-0.25 / (x * x)).exp() / (x * x * PI.sqrt())
}

/// Density of `X` for p = 1.
pub fn ratio_density_p1(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidParameter(format!("density evaluated at x = {x}; needs x > 0")));
    }
    Ok(density(x))
}

/// `P(X <= x)` by integrating the density. Above 1 the substitution
/// `t = 1/u` turns the heavy tail into the smooth integrand `e^(-u^2/4)/sqrt(pi)`.
pub fn ratio_cdf_p1(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if x <= 1.0 {
        return integrate(density, 0.0, x, QUAD_TOL);
    }
    let tail = |u: f64| (-0.25 * u * u).exp() / PI.sqrt();
    integrate(density, 0.0, 1.0, QUAD_TOL) + integrate(tail, 1.0 / x, 1.0, QUAD_TOL)
}

/// `E X^q` for `q < 1` by quadrature over the positive axis.
pub fn ratio_moment_p1(q: f64) -> Result<f64> {
    if !(q < 1.0) {
        return Err(Error::InvalidParameter(format!("moment of order {q} is infinite")));
    }
    Ok(integrate_positive_axis(|x| x.powf(q) * density(x), QUAD_TOL))
}

/// Inverse of [`ratio_cdf_p1`] by bisection.
pub fn ratio_quantile_p1(prob: f64) -> Result<f64> {
    if !(prob > 0.0 && prob < 1.0) {
        return Err(Error::InvalidParameter(format!("probability {prob} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while ratio_cdf_p1(hi) < prob {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ratio_cdf_p1(mid) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
