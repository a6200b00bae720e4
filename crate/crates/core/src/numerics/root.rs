// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::error::{Error, Result};

/// Interval whose endpoint values straddle zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootBracket {
    pub lower: f64,
    pub upper: f64,
}

impl RootBracket {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower <= upper) {
            return Err(Error::invalid(format!("bad bracket [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }
}

/// Root of a nondecreasing `f` in `bracket`. `f` returns `(value, derivative)`.
///
/// Newton steps are taken while they stay inside the shrinking bracket and
/// halve its width at least every other step; otherwise the step bisects.
pub fn solve_increasing<F>(mut f: F, bracket: RootBracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<(f64, f64)>,
{
    let (mut lo, mut hi) = (bracket.lower, bracket.upper);
    let (f_lo, _) = f(lo)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    let (f_hi, _) = f(hi)?;
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoRoot(format!(
            "f({lo}) = {f_lo:e}, f({hi}) = {f_hi:e} do not bracket an increasing root"
        )));
    }

    // Start from the secant point; it is usually closer than the midpoint.
    let mut x = lo - f_lo * (hi - lo) / (f_hi - f_lo);
    if !(x > lo && x < hi) {
        x = 0.5 * (lo + hi);
    }
    let mut last_width = hi - lo;
    for _ in 0..200 {
        let (fx, dfx) = f(x)?;
        if fx.abs() <= tol || fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= tol * (1.0 + x.abs()) {
            return Ok(x);
        }
        let newton = x - fx / dfx;
        let width = hi - lo;
        let halving = width <= 0.5 * last_width;
        x = if dfx > 0.0 && newton > lo && newton < hi && (halving || (newton - x).abs() < 0.25 * width) {
            newton
        } else {
            0.5 * (lo + hi)
        };
        last_width = width;
    }
    Ok(x)
}

/// Plain bisection for a nondecreasing `f`; stops when the bracket is `tol` wide.
pub fn bisect_increasing<F>(mut f: F, bracket: RootBracket, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (bracket.lower, bracket.upper);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo < 0.0 && f_hi > 0.0) {
        return Err(Error::NoRoot(format!(
            "f({lo}) = {f_lo:e}, f({hi}) = {f_hi:e} do not bracket an increasing root"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn linear_and_exponential() {
        let b = RootBracket::new(0.0, 5.0).unwrap();
        let r = solve_increasing(|t| Ok((t - 2.0, 1.0)), b, 1e-12).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
        let b = RootBracket::new(0.0, 2.0).unwrap();
        let r = solve_increasing(|t| Ok((t.exp() - 3.0, t.exp())), b, 1e-13).unwrap();
        assert!((r - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn no_sign_change() {
        let b = RootBracket::new(0.0, 1.0).unwrap();
        assert!(matches!(solve_increasing(|t| Ok((t + 1.0, 1.0)), b, 1e-10), Err(Error::NoRoot(_))));
        assert!(matches!(bisect_increasing(|t| Ok(t + 1.0), b, 1e-10), Err(Error::NoRoot(_))));
        assert_eq!(solve_increasing(|t| Ok((t, 1.0)), b, 1e-10).unwrap(), 0.0);
    }

    #[test]
    fn misleading_derivative_falls_back_to_bisection() {
        // Derivative reported as zero and then wildly wrong.
        let b = RootBracket::new(-1.0, 3.0).unwrap();
        let r = solve_increasing(|t| Ok((t.powi(3) - 1.0, if t.abs() < 0.5 { 0.0 } else { 1e-6 })), b, 1e-12).unwrap();
        assert!((r - 1.0).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn stays_inside_bracket(a in -5.0f64..0.0, w in 0.1f64..10.0, root in 0.0f64..1.0, k in 0.1f64..20.0) {
            let lo = a;
            let hi = a + w;
            let r0 = lo + root * w;
            let b = RootBracket::new(lo, hi).unwrap();
            let r = solve_increasing(|t| Ok(((k * (t - r0)).tanh(), k / (k * (t - r0)).cosh().powi(2))), b, 1e-12).unwrap();
            prop_assert!(r >= lo && r <= hi);
            prop_assert!((r - r0).abs() < 1e-9);
        }
    }
}
