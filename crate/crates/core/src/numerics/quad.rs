// SPDX-License-Identifier: MIT OR Apache-2.0

// Node tables are kept at the precision they are published with.
#![allow(clippy::excessive_precision)]

//! Globally adaptive 7/15-point Gauss–Kronrod quadrature.
//!
//! Infinite and half-infinite ranges are mapped onto finite panels with
//! rational substitutions anchored at a caller-supplied center and scale, so
//! the first panels already resolve the bulk of a peaked integrand.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Adaptive quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-14,
            rel_tol: 1e-10,
            max_subdivisions: 500,
        }
    }
}

impl Quadrature {
    /// Kronrod nodes per panel.
    pub const PANEL_NODES: usize = 15;

    pub fn new(abs_tol: f64, rel_tol: f64, max_subdivisions: usize) -> Result<Self> {
        if !(abs_tol > 0.0 && rel_tol > 0.0) {
            return Err(Error::invalid("quadrature tolerances must be positive"));
        }
        if max_subdivisions == 0 {
            return Err(Error::invalid("max_subdivisions must be at least 1"));
        }
        Ok(Self {
            abs_tol,
            rel_tol,
            max_subdivisions,
        })
    }
}

/// Integration range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Finite { lower: f64, upper: f64 },
    /// (-inf, inf) with the integrand's mass near `center` over width `scale`.
    Real { center: f64, scale: f64 },
    /// [lower, inf).
    Above { lower: f64, scale: f64 },
    /// (-inf, upper].
    Below { upper: f64, scale: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gauss_kronrod(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Panel { a, b, value, error }
}

/// Integrates `f` over `domain`.
pub fn integrate_on(
    mut f: impl FnMut(f64) -> f64,
    quad: &Quadrature,
    domain: Domain,
) -> Result<Integral> {
    match domain {
        Domain::Finite { lower, upper } => {
            if !(lower.is_finite() && upper.is_finite()) {
                return Err(Error::invalid("finite domain needs finite endpoints"));
            }
            if lower == upper {
                return Ok(Integral { value: 0.0, error: 0.0, subdivisions: 0 });
            }
            adaptive(&mut f, quad, &linspace(lower, upper, 2))
        }
        Domain::Real { center, scale } => {
            check_scale(scale)?;
            let mut g = |x: f64| {
                let d = 1.0 - x * x;
                if d <= 0.0 {
                    return 0.0;
                }
                let v = f(center + scale * x / d);
                if v == 0.0 { 0.0 } else { v * scale * (1.0 + x * x) / (d * d) }
            };
            adaptive(&mut g, quad, &linspace(-1.0, 1.0, 8))
        }
        Domain::Above { lower, scale } => {
            check_scale(scale)?;
            let mut g = |x: f64| {
                let d = 1.0 - x;
                if d <= 0.0 {
                    return 0.0;
                }
                let v = f(lower + scale * x / d);
                if v == 0.0 { 0.0 } else { v * scale / (d * d) }
            };
            adaptive(&mut g, quad, &linspace(0.0, 1.0, 4))
        }
        Domain::Below { upper, scale } => {
            check_scale(scale)?;
            let mut g = |x: f64| {
                let d = 1.0 - x;
                if d <= 0.0 {
                    return 0.0;
                }
                let v = f(upper - scale * x / d);
                if v == 0.0 { 0.0 } else { v * scale / (d * d) }
            };
            adaptive(&mut g, quad, &linspace(0.0, 1.0, 4))
        }
    }
}

/// Integrates `f` over the real line, with mass located by `center` and `scale`.
pub fn integrate(
    f: impl FnMut(f64) -> f64,
    quad: &Quadrature,
    center: f64,
    scale: f64,
) -> Result<f64> {
    integrate_on(f, quad, Domain::Real { center, scale }).map(|r| r.value)
}

fn check_scale(scale: f64) -> Result<()> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("quadrature scale must be positive, got {scale}")))
    }
}

fn linspace(a: f64, b: f64, panels: usize) -> Vec<f64> {
    (0..=panels)
        .map(|i| a + (b - a) * i as f64 / panels as f64)
        .collect()
}

fn adaptive(f: &mut impl FnMut(f64) -> f64, quad: &Quadrature, edges: &[f64]) -> Result<Integral> {
    let mut panels: Vec<Panel> = edges
        .windows(2)
        .map(|w| gauss_kronrod(f, w[0], w[1]))
        .collect();
    let mut subdivisions = 0;
    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::QuadratureFailure { estimate: value, error, index: None });
        }
        if error <= quad.abs_tol.max(quad.rel_tol * value.abs()) {
            return Ok(Integral { value, error, subdivisions });
        }
        if subdivisions >= quad.max_subdivisions {
            return Err(Error::QuadratureFailure { estimate: value, error, index: None });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(p.a < mid && mid < p.b) {
            // Panel at floating-point resolution; its error cannot shrink further.
            return Err(Error::QuadratureFailure { estimate: value, error, index: None });
        }
        panels.push(gauss_kronrod(f, p.a, mid));
        panels.push(gauss_kronrod(f, mid, p.b));
        subdivisions += 1;
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}
