//! C ABI over the `tops` library.
//!
//! Every function returns a [`TopsStatus`]; on failure the message is kept
//! per thread and can be read with [`tops_last_error_message`]. Paths are
//! opaque handles released with [`tops_path_free`]. Input arrays are
//! borrowed for the duration of the call only.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use tops::series_prep::{standardize, ReturnSeries};
use tops::stats::{self, AdfVariant, LagOrder};
use tops::synthetic::synthetic_origin;
use tops::tops::{distance_matrix, run_ensemble, to_calendar_lags, EnsembleConfig, LeadLagPath};
use tops::{Error, ErrorClass};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InputError = 3,
    ComputationError = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TopsAdfVariant {
    Constant = 0,
    ConstantAndTrend = 1,
}

/// Lead-lag path sampled on the calendar of the second series.
pub struct TopsPath {
    inner: LeadLagPath,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TopsSummary {
    pub n: usize,
    pub mean: f64,
    pub maximum: f64,
    pub minimum: f64,
    pub std_dev: f64,
    pub skewness: f64,
    /// Raw kurtosis, 3 for a normal sample.
    pub kurtosis: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TopsTestResult {
    pub statistic: f64,
    pub p_value: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct TopsRegression {
    pub intercept: f64,
    pub slope: f64,
    pub slope_std_err: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub n_obs: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> TopsStatus {
    match err.class() {
        ErrorClass::Input => TopsStatus::InputError,
        ErrorClass::Computation => TopsStatus::ComputationError,
    }
}

enum Fail {
    Status(TopsStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

fn guard<F>(f: F) -> TopsStatus
where
    F: FnOnce() -> Result<(), Fail>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TopsStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic");
            TopsStatus::Panic
        }
    }
}

unsafe fn input<'a>(p: *const f64, n: usize, name: &str) -> Result<&'a [f64], Fail> {
    if p.is_null() {
        return Err(Fail::Status(TopsStatus::NullPointer, format!("{name} is null")));
    }
    Ok(slice::from_raw_parts(p, n))
}

fn null(name: &str) -> Fail {
    Fail::Status(TopsStatus::NullPointer, format!("{name} is null"))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn tops_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Runs the thermal optimal path ensemble on `x` and `y` (both length `n`).
///
/// With `standardize_inputs` nonzero both series are z-scored first. On
/// success `*out` receives a handle owned by the caller.
///
/// # Safety
/// `x` and `y` must point to `n` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tops_ensemble_run(
    x: *const f64,
    y: *const f64,
    n: usize,
    margin: usize,
    temperature: f64,
    standardize_inputs: i32,
    out: *mut *mut TopsPath,
) -> TopsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let (x, y) = (input(x, n, "x")?, input(y, n, "y")?);
        let mut xs = ReturnSeries::from_values(x.to_vec(), synthetic_origin());
        let mut ys = ReturnSeries::from_values(y.to_vec(), synthetic_origin());
        if standardize_inputs != 0 {
            xs = standardize(&xs)?;
            ys = standardize(&ys)?;
        }
        let cfg = EnsembleConfig {
            margin,
            temperature,
            ..EnsembleConfig::default()
        };
        let d = distance_matrix(&xs, &ys)?;
        let outcome = run_ensemble(&d, &cfg)?;
        let path = to_calendar_lags(&outcome.path, &ys.dates, temperature)?;
        *out = Box::into_raw(Box::new(TopsPath { inner: path }));
        Ok(())
    })
}

/// Releases a path handle; null is ignored.
///
/// # Safety
/// `path` must come from [`tops_ensemble_run`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn tops_path_free(path: *mut TopsPath) {
    if !path.is_null() {
        drop(Box::from_raw(path));
    }
}

/// Number of calendar indices the path covers; 0 for null.
///
/// # Safety
/// `path` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn tops_path_len(path: *const TopsPath) -> usize {
    path.as_ref().map_or(0, |p| p.inner.len())
}

/// Copies covered calendar indices and lags (positive: `x` leads `y`).
/// Either output may be null; otherwise each must hold `capacity` entries.
///
/// # Safety
/// `path` must be live; non-null outputs must be writable for `capacity`.
#[no_mangle]
pub unsafe extern "C" fn tops_path_copy(
    path: *const TopsPath,
    indices: *mut usize,
    lags: *mut f64,
    capacity: usize,
) -> TopsStatus {
    guard(|| {
        let p = &path.as_ref().ok_or_else(|| null("path"))?.inner;
        if capacity < p.len() {
            return Err(Fail::Status(
                TopsStatus::BufferTooSmall,
                format!("need {} entries, got {capacity}", p.len()),
            ));
        }
        if !indices.is_null() {
            slice::from_raw_parts_mut(indices, p.len()).copy_from_slice(&p.indices);
        }
        if !lags.is_null() {
            slice::from_raw_parts_mut(lags, p.len()).copy_from_slice(&p.lag_days);
        }
        Ok(())
    })
}

/// Start offsets of the selected member and its free energy per step.
///
/// # Safety
/// `path` must be live; outputs may be null.
#[no_mangle]
pub unsafe extern "C" fn tops_path_member(
    path: *const TopsPath,
    i1: *mut usize,
    i2: *mut usize,
    free_energy_per_step: *mut f64,
) -> TopsStatus {
    guard(|| {
        let p = &path.as_ref().ok_or_else(|| null("path"))?.inner;
        if let Some(v) = i1.as_mut() {
            *v = p.member.0;
        }
        if let Some(v) = i2.as_mut() {
            *v = p.member.1;
        }
        if let Some(v) = free_energy_per_step.as_mut() {
            *v = p.free_energy_per_step;
        }
        Ok(())
    })
}

/// # Safety
/// `x` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tops_summary_stats(
    x: *const f64,
    n: usize,
    out: *mut TopsSummary,
) -> TopsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = stats::summary_stats(input(x, n, "x")?)?;
        *out = TopsSummary {
            n: s.n,
            mean: s.mean,
            maximum: s.maximum,
            minimum: s.minimum,
            std_dev: s.std_dev,
            skewness: s.skewness,
            kurtosis: s.kurtosis,
        };
        Ok(())
    })
}

/// # Safety
/// `x` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tops_jarque_bera(
    x: *const f64,
    n: usize,
    out: *mut TopsTestResult,
) -> TopsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = stats::jarque_bera(input(x, n, "x")?)?;
        *out = TopsTestResult {
            statistic: r.statistic,
            p_value: r.p_value,
        };
        Ok(())
    })
}

/// Augmented Dickey-Fuller test; `variant` is a [`TopsAdfVariant`] value and
/// `lags < 0` selects the automatic order.
///
/// # Safety
/// `x` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tops_adf_test(
    x: *const f64,
    n: usize,
    variant: i32,
    lags: i64,
    out: *mut TopsTestResult,
) -> TopsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let variant = match variant {
            v if v == TopsAdfVariant::Constant as i32 => AdfVariant::Constant,
            v if v == TopsAdfVariant::ConstantAndTrend as i32 => AdfVariant::ConstantAndTrend,
            v => {
                return Err(Fail::Status(
                    TopsStatus::InvalidArgument,
                    format!("unknown ADF variant {v}"),
                ))
            }
        };
        let lags = if lags < 0 {
            LagOrder::Auto
        } else {
            LagOrder::Fixed(lags as usize)
        };
        let r = stats::adf_test(input(x, n, "x")?, variant, lags)?;
        *out = TopsTestResult {
            statistic: r.statistic,
            p_value: r.p_value,
        };
        Ok(())
    })
}

/// # Safety
/// `x` and `y` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tops_pearson_correlation(
    x: *const f64,
    y: *const f64,
    n: usize,
    out: *mut f64,
) -> TopsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = stats::pearson_correlation(input(x, n, "x")?, input(y, n, "y")?)?;
        Ok(())
    })
}

/// Least squares `y = intercept + slope * x`.
///
/// # Safety
/// `y` and `x` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tops_ols_fit(
    y: *const f64,
    x: *const f64,
    n: usize,
    out: *mut TopsRegression,
) -> TopsStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let r = stats::ols_fit(input(y, n, "y")?, input(x, n, "x")?)?;
        *out = TopsRegression {
            intercept: r.intercept,
            slope: r.slope,
            slope_std_err: r.slope_std_err,
            t_stat: r.t_stat,
            p_value: r.p_value,
            n_obs: r.n_obs,
        };
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tops_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
