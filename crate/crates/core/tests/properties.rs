// SPDX-License-Identifier: MIT OR Apache-2.0

use proptest::prelude::*;
use serialcorr::ar1::{condition_decompose, even_values, serial_correlation, statistic_s, Ar1Series};
use serialcorr::bootstrap::conditional_bootstrap_mixture;
use serialcorr::cgf::{ConditionalCgf, GaussianConditionalCgf};
use serialcorr::saddlepoint::{conditional_tail, gaussian_unconditional_tail};

fn series(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    len.prop_flat_map(|m| prop::collection::vec(-5.0..5.0f64, 2 * m + 1))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn correlation_lies_in_unit_interval(x in series(1..=30)) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-6));
        let r = serial_correlation(&Ar1Series::observed(x).unwrap()).unwrap();
        prop_assert!(r.abs() <= 1.0);
    }

    #[test]
    fn sign_of_s_matches_r_minus_u(x in series(1..=30), u in -0.95..0.95f64) {
        prop_assume!(x.iter().any(|v| v.abs() > 1e-3));
        let s = Ar1Series::observed(x).unwrap();
        let r = serial_correlation(&s).unwrap();
        prop_assume!((r - u).abs() > 1e-9);
        prop_assert_eq!(statistic_s(&s, u) > 0.0, r > u);
    }

    #[test]
    fn completed_square_identity(x in series(1..=30), u in 0.05..0.95f64) {
        let s = Ar1Series::observed(x).unwrap();
        let c = condition_decompose(&s);
        let direct = statistic_s(&s, u);
        let split = c.s_completed_square(&even_values(&s), u);
        prop_assert!((direct - split).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn unconditional_tail_decreases_in_u(n in (2usize..=30).prop_map(|m| 2 * m + 1), rho in -0.8..0.8f64, a in -0.9..0.9f64, b in -0.9..0.9f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-3);
        let p = gaussian_unconditional_tail(n, rho, lo).unwrap().tail;
        let q = gaussian_unconditional_tail(n, rho, hi).unwrap().tail;
        prop_assert!((0.0..=1.0).contains(&p) && (0.0..=1.0).contains(&q));
        prop_assert!(q <= p + 1e-12);
    }

    #[test]
    fn conditional_cgf_vanishes_at_zero(x in series(2..=20), rho in -0.8..0.8f64, u in 0.05..0.95f64) {
        let g = GaussianConditionalCgf::new(condition_decompose(&Ar1Series::observed(x).unwrap()), rho).unwrap();
        let e = g.eval(0.0, u).unwrap();
        prop_assert!(e.k.abs() <= 1e-12);
        prop_assert!(e.k20 > 0.0);
    }

    #[test]
    fn conditional_tail_is_a_probability(x in series(3..=15), u in 0.05..0.95f64) {
        let g = GaussianConditionalCgf::new(condition_decompose(&Ar1Series::observed(x).unwrap()), 0.5).unwrap();
        let r = conditional_tail(&g, u).unwrap();
        prop_assert!((0.0..=1.0).contains(&r.tail));
        if !r.feasible {
            prop_assert_eq!(r.tail, 0.0);
        }
    }

    #[test]
    fn mixture_weights_sum_to_one(x in series(2..=8), rho0 in -0.8..0.8f64, tau in 0.05..1.0f64) {
        let s = Ar1Series::observed(x).unwrap();
        let mix = conditional_bootstrap_mixture(&s, rho0, tau).unwrap();
        for i in 0..s.m() {
            let total: f64 = mix.components(i).iter().map(|p| p.log_weight.exp()).sum();
            prop_assert!((total - 1.0).abs() <= 1e-12);
        }
    }
}
