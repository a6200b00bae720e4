// SPDX-License-Identifier: MIT OR Apache-2.0

use libm::erfc;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Log of the standard normal density.
#[inline]
pub fn log_normal_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Density of N(mean, var) at `z`.
#[inline]
pub fn gaussian_pdf(z: f64, mean: f64, var: f64) -> f64 {
    let d = z - mean;
    (-0.5 * d * d / var).exp() / (2.0 * PI * var).sqrt()
}

/// Upper tail P(Z >= z) of the standard normal.
pub fn normal_upper_tail(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z >= 0.0 {
        0.5 * erfc(z * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * erfc(-z * FRAC_1_SQRT_2)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    normal_upper_tail(-z)
}

/// ln P(Z >= z), finite far beyond the range where the tail underflows.
pub fn log_normal_upper_tail(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z < 0.0 {
        return (-normal_upper_tail(-z)).ln_1p();
    }
    if z < 30.0 {
        return normal_upper_tail(z).ln();
    }
    // Laplace continued fraction for the Mills ratio, evaluated bottom-up.
    let mut frac = z;
    for k in (1..=40).rev() {
        frac = z + f64::from(k) / frac;
    }
    log_normal_pdf(z) - frac.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Φ(z) − ½ = φ(z)·Σ z^{2k+1}/(1·3·…·(2k+1)), a series of positive terms.
    fn upper_tail_by_series(z: f64) -> f64 {
        let mut term = z;
        let mut sum = z;
        let mut k = 0.0;
        while term > 1e-20 * sum {
            k += 1.0;
            term *= z * z / (2.0 * k + 1.0);
            sum += term;
        }
        0.5 - normal_pdf(z) * sum
    }

    /// Asymptotic series for the Mills ratio Φ̄(z)/φ(z), valid for large z.
    fn mills_asymptotic(z: f64) -> f64 {
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..12 {
            term *= -f64::from(2 * k - 1) / (z * z);
            sum += term;
        }
        sum / z
    }

    fn upper_tail_asymptotic(z: f64) -> f64 {
        normal_pdf(z) * mills_asymptotic(z)
    }

    #[test]
    fn center_and_symmetry() {
        assert_eq!(normal_upper_tail(0.0), 0.5);
        for &z in &[0.1, 0.7, 1.3, 2.5, 4.0, 7.5, 12.0] {
            let s = normal_upper_tail(z) + normal_upper_tail(-z);
            assert!((s - 1.0).abs() < 1e-14, "z = {z}: {s}");
        }
    }

    #[test]
    fn matches_series_at_three() {
        let oracle = upper_tail_by_series(3.0);
        assert!((oracle - 0.001_349_898_031_630_095).abs() < 1e-15);
        let got = normal_upper_tail(3.0);
        assert!(((got - oracle) / oracle).abs() < 1e-12, "{got} vs {oracle}");
    }

    #[test]
    fn relative_accuracy_across_range() {
        for i in 0..=30 {
            let z = 0.1 * f64::from(i);
            let oracle = upper_tail_by_series(z);
            let got = normal_upper_tail(z);
            assert!(((got - oracle) / oracle).abs() < 1e-12, "z = {z}");
        }
        // Beyond ~37.5 the tail is below the smallest subnormal.
        for &z in &[10.0, 15.0, 20.0, 26.0, 33.0, 37.0] {
            let oracle = upper_tail_asymptotic(z);
            let got = normal_upper_tail(z);
            assert!(((got - oracle) / oracle).abs() < 1e-12, "z = {z}: {got} vs {oracle}");
        }
    }

    #[test]
    fn log_tail_is_stable_far_out() {
        for &z in &[5.0, 20.0, 29.9, 30.0, 35.0] {
            let direct = normal_upper_tail(z).ln();
            assert!((log_normal_upper_tail(z) - direct).abs() < 1e-11 * direct.abs());
        }
        let v = log_normal_upper_tail(200.0);
        let expected = log_normal_pdf(200.0) + mills_asymptotic(200.0).ln();
        assert!((v - expected).abs() < 1e-12 * expected.abs());
        assert!((log_normal_upper_tail(-3.0) - (1.0 - normal_upper_tail(3.0)).ln()).abs() < 1e-15);
    }
}
