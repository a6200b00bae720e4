// SPDX-License-Identifier: MIT OR Apache-2.0

//! Numerical kernels: dense symmetric linear algebra, adaptive quadrature,
//! bracketed root finding and the normal tail.

pub mod linalg;
pub mod normal;
pub mod quad;
pub mod root;

pub use linalg::{cholesky_upper, symmetric_eigenvalues, Matrix};
pub use normal::{log_normal_upper_tail, normal_cdf, normal_pdf, normal_upper_tail};
pub use quad::{gauss_legendre, integrate, integrate_on, Domain, Integral, Quadrature};
pub use root::{bisect_increasing, solve_increasing, RootBracket};

/// ln Σ exp(xᵢ), with the maximum factored out.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::log_sum_exp;

    #[test]
    fn lse_handles_large_exponents() {
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[-1e4, 0.0]) - 0.0).abs() < 1e-15);
    }
}
