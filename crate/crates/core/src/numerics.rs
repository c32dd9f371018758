//! Adaptive Gauss-Kronrod quadrature and the Kolmogorov-Smirnov distance.

// 15-point Kronrod nodes (nonnegative half) with Kronrod and embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_DEPTH: u32 = 50;

fn kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = kronrod(f, a, b);
    if err <= tol || depth >= MAX_DEPTH || b - a <= f64::EPSILON * a.abs().max(b.abs()) {
        return value;
    }
    let m = 0.5 * (a + b);
    adapt(f, a, m, 0.5 * tol, depth + 1) + adapt(f, m, b, 0.5 * tol, depth + 1)
}

/// `int_a^b f` to absolute tolerance `tol` (G7/K15, bisection on failure).
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    adapt(&f, a, b, tol, 0)
}

/// `int_0^inf f` via `x = e^s`, integrating `s` over `[-40, 80]` in unit-2 panels.
///
/// Suited to integrands that vanish faster than any power at 0 and decay at
/// least like `x^-(1+c)` at infinity.
pub fn integrate_positive_axis(f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let g = |s: f64| {
        let x = s.exp();
        f(x) * x
    };
    let panels = 60;
    (0..panels)
        .map(|k| {
            let a = -40.0 + 2.0 * k as f64;
            adapt(&g, a, a + 2.0, tol / panels as f64, 0)
        })
        .sum()
}

/// `sup_x |F_n(x) - F(x)|` for samples sorted ascending and `cdf[i] = F(sorted[i])`.
pub fn ks_distance(cdf_at_sorted: &[f64]) -> f64 {
    let n = cdf_at_sorted.len() as f64;
    cdf_at_sorted
        .iter()
        .enumerate()
        .map(|(i, &f)| (f - i as f64 / n).max((i + 1) as f64 / n - f))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_gaussian() {
        assert!((integrate(|x| x * x, 0.0, 3.0, 1e-13) - 9.0).abs() < 1e-12);
        let g = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-13);
        assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn endpoint_singularity() {
        // int_0^1 x^-1/2 = 2
        let v = integrate(|x| if x > 0.0 { x.powf(-0.5) } else { 0.0 }, 0.0, 1.0, 1e-10);
        assert!((v - 2.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn positive_axis() {
        let v = integrate_positive_axis(|x| (-x).exp(), 1e-12);
        assert!((v - 1.0).abs() < 1e-10);
        // int_0^inf 1/(1+x)^2 = 1
        let v = integrate_positive_axis(|x| 1.0 / ((1.0 + x) * (1.0 + x)), 1e-12);
        assert!((v - 1.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn ks_of_perfect_grid() {
        let n = 100;
        let cdf: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        assert!((ks_distance(&cdf) - 0.005).abs() < 1e-15);
    }
}
