// SPDX-License-Identifier: MIT OR Apache-2.0

//! C ABI over the serialcorr library.
//!
//! Every fallible function returns an [`ScStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`serialcorr_last_error`]. Handles are created by `*_new` style
//! functions and released with the matching `*_free`; passing null to a
//! `*_free` is a no-op.

use serialcorr::ar1::{self, Ar1Series, ErrorDistribution, TailEstimate};
use serialcorr::bootstrap::{self, BootstrapConfig, BootstrapScheme};
use serialcorr::cgf::{ConditionalCgf, GaussianConditionalCgf, GeneralConditionalCgf};
use serialcorr::saddlepoint::{self, SaddleResult};
use serialcorr::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DegenerateInput = 3,
    FactorizationFailure = 4,
    QuadratureFailure = 5,
    NoRoot = 6,
    SaddleFailure = 7,
    Parse = 8,
    Io = 9,
    /// A Rust panic was caught at the boundary.
    Internal = 10,
}

impl From<&Error> for ScStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidArgument(_) => Self::InvalidArgument,
            Error::DegenerateInput(_) => Self::DegenerateInput,
            Error::FactorizationFailure(_) => Self::FactorizationFailure,
            Error::QuadratureFailure { .. } => Self::QuadratureFailure,
            Error::NoRoot(_) => Self::NoRoot,
            Error::SaddleFailure { .. } => Self::SaddleFailure,
            Error::Parse(_) => Self::Parse,
            Error::Io(_) => Self::Io,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScDistKind {
    Normal = 0,
    /// Unit-variance Student t; `dof` must be at least 9.
    StudentT = 1,
    CenteredExponential = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ScDistribution {
    pub kind: ScDistKind,
    /// Degrees of freedom, read only for `StudentT`.
    pub dof: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScScheme {
    Unconditional = 0,
    Smoothed = 1,
    Conditional = 2,
}

/// Saddlepoint tail with its intermediate quantities. For an infeasible
/// conditional threshold `feasible` is 0, `tail` is 0 and the rest are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ScSaddle {
    pub u: f64,
    pub u0: f64,
    pub t_hat: f64,
    pub w: f64,
    pub psi: f64,
    pub w_plus: f64,
    pub tail: f64,
    pub feasible: i32,
    pub m: usize,
}

impl From<SaddleResult> for ScSaddle {
    fn from(r: SaddleResult) -> Self {
        Self {
            u: r.u,
            u0: r.u0,
            t_hat: r.t_hat,
            w: r.w,
            psi: r.psi,
            w_plus: r.w_plus,
            tail: r.tail,
            feasible: i32::from(r.feasible),
            m: r.m,
        }
    }
}

/// Monte Carlo tail estimate.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct ScTail {
    pub probability: f64,
    pub std_error: f64,
    pub replicates: u64,
    pub seed: u64,
}

impl From<TailEstimate> for ScTail {
    fn from(t: TailEstimate) -> Self {
        Self { probability: t.probability, std_error: t.std_error, replicates: t.replicates, seed: t.seed }
    }
}

/// An observed or simulated series of odd length.
pub struct ScSeries {
    inner: Ar1Series,
}

/// A conditional CGF bound to the odd-indexed values of one series.
pub struct ScConditional {
    inner: Box<dyn ConditionalCgf>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let mut bytes = e.into_vec();
        bytes.retain(|&b| b != 0);
        CString::new(bytes).expect("nul bytes removed")
    });
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Runs `f`, maps errors and panics to a status and records the message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> ScStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ScStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            ScStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_error(e.to_string());
            ScStatus::from(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal error: {msg}"));
            ScStatus::Internal
        }
    }
}

enum Failure {
    Null(&'static str),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

unsafe fn write<T>(p: *mut T, what: &'static str, value: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    p.write(value);
    Ok(())
}

unsafe fn slice<'a>(p: *const f64, len: usize, what: &'static str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn distribution(d: ScDistribution) -> Result<ErrorDistribution, Failure> {
    Ok(match d.kind {
        ScDistKind::Normal => ErrorDistribution::Normal,
        ScDistKind::StudentT => ErrorDistribution::student_t(d.dof)?,
        ScDistKind::CenteredExponential => ErrorDistribution::CenteredExponential,
    })
}

fn scheme(s: ScScheme) -> BootstrapScheme {
    match s {
        ScScheme::Unconditional => BootstrapScheme::Unconditional,
        ScScheme::Smoothed => BootstrapScheme::Smoothed,
        ScScheme::Conditional => BootstrapScheme::Conditional,
    }
}

/// Message for the last failed call on this thread, or null if it
/// succeeded. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn serialcorr_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn serialcorr_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Copies `len` observations into a new series. `len` must be odd and at least 3.
///
/// # Safety
/// `x` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_series_new(x: *const f64, len: usize, out: *mut *mut ScSeries) -> ScStatus {
    guard(|| {
        let values = slice(x, len, "x")?.to_vec();
        let series = Ar1Series::observed(values)?;
        write(out, "out", Box::into_raw(Box::new(ScSeries { inner: series })))
    })
}

/// Simulates a stationary AR(1) series of odd length `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_series_simulate(
    n: usize,
    rho: f64,
    dist: ScDistribution,
    seed: u64,
    out: *mut *mut ScSeries,
) -> ScStatus {
    guard(|| {
        let series = ar1::simulate_ar1(n, rho, distribution(dist)?, seed)?;
        write(out, "out", Box::into_raw(Box::new(ScSeries { inner: series })))
    })
}

/// # Safety
/// `series` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_series_free(series: *mut ScSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// Number of observations, or 0 for a null handle.
///
/// # Safety
/// `series` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_series_len(series: *const ScSeries) -> usize {
    series.as_ref().map_or(0, |s| s.inner.n())
}

/// Copies the observations into `buf`, which must hold `serialcorr_series_len` values.
///
/// # Safety
/// `series` must be a live handle; `buf` must have room for `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_series_values(series: *const ScSeries, buf: *mut f64, cap: usize) -> ScStatus {
    guard(|| {
        let s = deref(series, "series")?;
        let x = s.inner.values();
        if cap < x.len() {
            return Err(Error::invalid(format!("buffer holds {cap} values, series has {}", x.len())).into());
        }
        if buf.is_null() {
            return Err(Failure::Null("buf"));
        }
        std::ptr::copy_nonoverlapping(x.as_ptr(), buf, x.len());
        Ok(())
    })
}

/// Lag-one serial correlation R of the series.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_series_correlation(series: *const ScSeries, out: *mut f64) -> ScStatus {
    guard(|| {
        let r = ar1::serial_correlation(&deref(series, "series")?.inner)?;
        write(out, "out", r)
    })
}

/// Gaussian unconditional saddlepoint P(R ≥ u) for length `n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_unconditional_tail(n: usize, rho: f64, u: f64, out: *mut ScSaddle) -> ScStatus {
    guard(|| {
        let r = saddlepoint::gaussian_unconditional_tail(n, rho, u)?;
        write(out, "out", r.into())
    })
}

/// Upper `level` critical value of the Gaussian unconditional saddlepoint.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_unconditional_critical_value(
    n: usize,
    rho: f64,
    level: f64,
    out: *mut f64,
) -> ScStatus {
    guard(|| {
        let c = saddlepoint::unconditional_critical_value(n, rho, level)?;
        write(out, "out", c)
    })
}

/// Monte Carlo P(R > u) over `replicates` simulated series.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_simulate_tail(
    n: usize,
    rho: f64,
    dist: ScDistribution,
    u: f64,
    replicates: usize,
    seed: u64,
    out: *mut ScTail,
) -> ScStatus {
    guard(|| {
        let t = ar1::simulate_tail(n, rho, distribution(dist)?, &[u], replicates, seed)?[0];
        write(out, "out", t.into())
    })
}

unsafe fn conditional(
    series: *const ScSeries,
    out: *mut *mut ScConditional,
    build: impl FnOnce(&Ar1Series) -> Result<Box<dyn ConditionalCgf>, Failure>,
) -> ScStatus {
    guard(|| {
        let inner = build(&deref(series, "series")?.inner)?;
        write(out, "out", Box::into_raw(Box::new(ScConditional { inner })))
    })
}

/// Exact conditional CGF for normal errors, conditioning on the series' odd values.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_conditional_gaussian(
    series: *const ScSeries,
    rho: f64,
    out: *mut *mut ScConditional,
) -> ScStatus {
    conditional(series, out, |s| {
        Ok(Box::new(GaussianConditionalCgf::new(ar1::condition_decompose(s), rho)?) as Box<dyn ConditionalCgf>)
    })
}

/// Conditional CGF by quadrature for a general error density.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_conditional_general(
    series: *const ScSeries,
    dist: ScDistribution,
    rho: f64,
    out: *mut *mut ScConditional,
) -> ScStatus {
    conditional(series, out, |s| {
        let dist = distribution(dist)?;
        Ok(Box::new(GeneralConditionalCgf::new(ar1::condition_decompose(s), dist, rho)?) as Box<dyn ConditionalCgf>)
    })
}

/// Conditional-bootstrap kernel mixture from the series' raw residuals at
/// `rho0`. A non-positive `tau` selects the default 1/m.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_conditional_bootstrap(
    series: *const ScSeries,
    rho0: f64,
    tau: f64,
    out: *mut *mut ScConditional,
) -> ScStatus {
    conditional(series, out, |s| {
        let tau = if tau > 0.0 { tau } else { 1.0 / s.m() as f64 };
        Ok(Box::new(bootstrap::conditional_bootstrap_mixture(s, rho0, tau)?) as Box<dyn ConditionalCgf>)
    })
}

/// # Safety
/// `cgf` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_conditional_free(cgf: *mut ScConditional) {
    if !cgf.is_null() {
        drop(Box::from_raw(cgf));
    }
}

/// Conditional saddlepoint P(R ≥ u | C).
///
/// # Safety
/// `cgf` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_conditional_tail(cgf: *const ScConditional, u: f64, out: *mut ScSaddle) -> ScStatus {
    guard(|| {
        let r = saddlepoint::conditional_tail(deref(cgf, "cgf")?.inner.as_ref(), u)?;
        write(out, "out", r.into())
    })
}

/// Upper `level` critical value of the conditional saddlepoint.
///
/// # Safety
/// `cgf` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_conditional_critical_value(
    cgf: *const ScConditional,
    level: f64,
    out: *mut f64,
) -> ScStatus {
    guard(|| {
        let c = saddlepoint::conditional_critical_value(deref(cgf, "cgf")?.inner.as_ref(), level)?;
        write(out, "out", c)
    })
}

/// Bootstrap P*(R* > u) under `rho0`. `tau` is used by the smoothed and
/// conditional schemes (non-positive selects 1/m); `n_cond` only by the
/// smoothed scheme. For the conditional scheme the Monte Carlo estimate is
/// returned; use [`serialcorr_conditional_bootstrap`] for its saddlepoint.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn serialcorr_bootstrap_tail(
    series: *const ScSeries,
    scheme_kind: ScScheme,
    rho0: f64,
    tau: f64,
    u: f64,
    replicates: usize,
    n_cond: usize,
    seed: u64,
    out: *mut ScTail,
) -> ScStatus {
    guard(|| {
        let s = &deref(series, "series")?.inner;
        let mut cfg = BootstrapConfig::new(scheme(scheme_kind), rho0, replicates, seed);
        if tau > 0.0 {
            cfg = cfg.with_tau(tau);
        }
        let t = match scheme_kind {
            ScScheme::Unconditional => bootstrap::unconditional_bootstrap_tail(s, &cfg, u)?,
            ScScheme::Smoothed => bootstrap::smoothed_bootstrap_tail(s, &cfg, u, n_cond)?,
            ScScheme::Conditional => bootstrap::conditional_bootstrap_tail(s, &cfg, u)?.mc,
        };
        write(out, "out", t.into())
    })
}
