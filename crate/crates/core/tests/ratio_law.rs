//! Law of the ratio `X = ||T x||_2 / ||x||_1` for the p = 1 operator.

use l1lab::numerics::integrate_positive_axis;
use l1lab::stable::{ratio_cdf_p1, ratio_density_p1, ratio_moment_p1, sample_ratios};
use statrs::function::erf::erfc;
use statrs::function::gamma::gamma;

const C: f64 = 0.564_189_583_547_756_3; // 1/sqrt(pi)

#[test]
fn closed_forms_agree() {
    for x in [0.05, 0.3, 1.0, 2.5, 40.0] {
        assert!((ratio_cdf_p1(x) - erfc(1.0 / (2.0 * x))).abs() < 1e-10, "x = {x}");
    }
    let total = integrate_positive_axis(|x| ratio_density_p1(x).unwrap_or(0.0), 1e-12);
    assert!((total - 1.0).abs() < 1e-8);
    for q in [-1.0, 0.25, 0.5, 0.75] {
        let exact = 2f64.powf(-q) * gamma((1.0 - q) / 2.0) / std::f64::consts::PI.sqrt();
        assert!((ratio_moment_p1(q).unwrap() - exact).abs() < 1e-8 * exact, "q = {q}");
    }
}

/// `t P(X > t) -> 1/sqrt(pi)` since the density decays like `1 / (sqrt(pi) x^2)`.
#[test]
fn heavy_tail_matches_density() {
    let xs = sample_ratios(1.0, &[1.0, -2.0, 0.5], 1_000, C, 1_000_000, 17).unwrap();
    for t in [10.0, 30.0, 100.0] {
        let tail = xs.values.iter().filter(|&&x| x > t).count() as f64 / xs.len() as f64;
        let scaled = t * tail;
        assert!((0.45..=0.70).contains(&scaled), "t = {t}: t P(X > t) = {scaled}");
    }
}
