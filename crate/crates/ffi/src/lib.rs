//! C interface to `salem2d`.
//!
//! Every fallible call returns a [`Salem2dStatus`]; the message of the most
//! recent failure on the calling thread is available from
//! [`salem2d_last_error`]. Objects are opaque and freed with their own
//! `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use salem2d::annulus::Mode;
use salem2d::fm::{FmOperator, FmParams};
use salem2d::measure::{Measure, MeasureSpec};
use salem2d::weight::{g_weight, GVariant};
use salem2d::{Error, GaussInt};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Salem2dStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Overflow = 3,
    Numeric = 4,
    Truncation = 5,
    Parse = 6,
    Io = 7,
    Verification = 8,
    SearchFailure = 9,
    Panic = 10,
}

impl From<&Error> for Salem2dStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Overflow(_) => Salem2dStatus::Overflow,
            Error::Domain(_) => Salem2dStatus::InvalidArgument,
            Error::Numeric(_) => Salem2dStatus::Numeric,
            Error::TruncationInsufficient { .. } => Salem2dStatus::Truncation,
            Error::Verification(_) => Salem2dStatus::Verification,
            Error::SearchFailure { .. } => Salem2dStatus::SearchFailure,
            Error::Io(_) => Salem2dStatus::Io,
            Error::Parse(_) => Salem2dStatus::Parse,
        }
    }
}

/// Selects the annulus population.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Salem2dMode {
    All = 0,
    Primes = 1,
}

impl From<Salem2dMode> for Mode {
    fn from(m: Salem2dMode) -> Self {
        match m {
            Salem2dMode::All => Mode::All,
            Salem2dMode::Primes => Mode::Primes,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|e| {
        let end = e.nul_position();
        CString::new(&e.into_vec()[..end]).unwrap_or_default()
    });
    LAST_ERROR.with(|s| *s.borrow_mut() = Some(c));
}

fn fail(status: Salem2dStatus, msg: impl Into<String>) -> Salem2dStatus {
    set_error(msg.into());
    status
}

/// Run `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), Salem2dStatus>) -> Salem2dStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Salem2dStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(Salem2dStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> Salem2dStatus {
    fail(Salem2dStatus::from(&e), e.to_string())
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Salem2dStatus> {
    p.as_mut().ok_or_else(|| fail(Salem2dStatus::NullPointer, format!("{name} is null")))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn salem2d_last_error() -> *const c_char {
    LAST_ERROR.with(|s| s.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn salem2d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `dim` must be a valid, writable pointer.
#[no_mangle]
pub unsafe extern "C" fn salem2d_dimension(tau: f64, dim: *mut f64) -> Salem2dStatus {
    guard(|| {
        let dim = out(dim, "dim")?;
        *dim = salem2d::diophantine::dimension(tau).map_err(lib)?;
        Ok(())
    })
}

/// Decay weight `g(ξ)` for exponent `a`; `prime_variant` selects the
/// logarithmic correction.
#[no_mangle]
pub extern "C" fn salem2d_g_weight(xi_x: f64, xi_y: f64, a: f64, prime_variant: bool) -> f64 {
    let v = if prime_variant { GVariant::Prime } else { GVariant::Standard };
    g_weight([xi_x, xi_y], a, v)
}

/// # Safety
/// `count` must be a valid, writable pointer.
#[no_mangle]
pub unsafe extern "C" fn salem2d_divisor_count(re: i64, im: i64, count: *mut u64) -> Salem2dStatus {
    guard(|| {
        let count = out(count, "count")?;
        *count = salem2d::gauss::divisor_count(GaussInt::new(re, im), None).map_err(lib)?;
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn salem2d_is_gaussian_prime(re: i64, im: i64) -> bool {
    salem2d::gauss::is_gaussian_prime(GaussInt::new(re, im))
}

/// Opaque handle to one operator `F_M`.
pub struct Salem2dFm(FmOperator);

/// Build `F_M` with shift `θ = (theta_x, theta_y)`.
///
/// # Safety
/// `handle` must be a valid, writable pointer. On success `*handle` owns a
/// new object to be released with [`salem2d_fm_free`].
#[no_mangle]
pub unsafe extern "C" fn salem2d_fm_new(
    m: f64,
    tau: f64,
    mode: Salem2dMode,
    theta_x: f64,
    theta_y: f64,
    handle: *mut *mut Salem2dFm,
) -> Salem2dStatus {
    guard(|| {
        let handle = out(handle, "handle")?;
        *handle = ptr::null_mut();
        let p = FmParams::new(m, tau).with_mode(mode.into()).with_theta([theta_x, theta_y]);
        let f = FmOperator::new(p).map_err(lib)?;
        *handle = Box::into_raw(Box::new(Salem2dFm(f)));
        Ok(())
    })
}

/// # Safety
/// `handle` is NULL or came from [`salem2d_fm_new`] and was not freed.
#[no_mangle]
pub unsafe extern "C" fn salem2d_fm_free(handle: *mut Salem2dFm) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// # Safety
/// `handle` must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn salem2d_fm_eval(handle: *const Salem2dFm, x: f64, y: f64, value: *mut f64) -> Salem2dStatus {
    guard(|| {
        let f = handle.as_ref().ok_or_else(|| fail(Salem2dStatus::NullPointer, "handle is null"))?;
        *out(value, "value")? = f.0.eval([x, y]);
        Ok(())
    })
}

/// Fourier coefficient at `ℓ = re + i·im`.
///
/// # Safety
/// `handle` must be live; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn salem2d_fm_coeff(
    handle: *const Salem2dFm,
    re: i64,
    im: i64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> Salem2dStatus {
    guard(|| {
        let f = handle.as_ref().ok_or_else(|| fail(Salem2dStatus::NullPointer, "handle is null"))?;
        let (r, i) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let c = f.0.coeff(GaussInt::new(re, im)).map_err(lib)?;
        *r = c.re;
        *i = c.im;
        Ok(())
    })
}

/// Number of `q` in the annulus, or 0 for NULL.
///
/// # Safety
/// `handle` is NULL or live.
#[no_mangle]
pub unsafe extern "C" fn salem2d_fm_annulus_size(handle: *const Salem2dFm) -> usize {
    handle.as_ref().map_or(0, |f| f.0.len())
}

/// Opaque handle to a materialized measure spec.
pub struct Salem2dMeasure(Measure);

/// Parse a JSON measure spec and build its coefficient boxes.
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string; `handle` must be writable.
/// Release the result with [`salem2d_measure_free`].
#[no_mangle]
pub unsafe extern "C" fn salem2d_measure_from_json(
    json: *const c_char,
    handle: *mut *mut Salem2dMeasure,
) -> Salem2dStatus {
    guard(|| {
        let handle = out(handle, "handle")?;
        *handle = ptr::null_mut();
        if json.is_null() {
            return Err(fail(Salem2dStatus::NullPointer, "json is null"));
        }
        let text =
            CStr::from_ptr(json).to_str().map_err(|e| fail(Salem2dStatus::Parse, format!("spec is not UTF-8: {e}")))?;
        let spec = MeasureSpec::from_json(text).map_err(lib)?;
        let m = Measure::new(spec).map_err(lib)?;
        *handle = Box::into_raw(Box::new(Salem2dMeasure(m)));
        Ok(())
    })
}

/// # Safety
/// `handle` is NULL or came from [`salem2d_measure_from_json`] and was not freed.
#[no_mangle]
pub unsafe extern "C" fn salem2d_measure_free(handle: *mut Salem2dMeasure) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Number of stages.
///
/// # Safety
/// `handle` is NULL or live.
#[no_mangle]
pub unsafe extern "C" fn salem2d_measure_depth(handle: *const Salem2dMeasure) -> usize {
    handle.as_ref().map_or(0, |m| m.0.depth())
}

/// # Safety
/// `handle` must be live; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn salem2d_measure_density(
    handle: *const Salem2dMeasure,
    x: f64,
    y: f64,
    value: *mut f64,
) -> Salem2dStatus {
    guard(|| {
        let m = handle.as_ref().ok_or_else(|| fail(Salem2dStatus::NullPointer, "handle is null"))?;
        *out(value, "value")? = m.0.density([x, y]);
        Ok(())
    })
}

/// Transform of stage `k` at `ξ` with its error bound. `error` may be NULL.
///
/// # Safety
/// `handle` must be live; `out_re` and `out_im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn salem2d_measure_stage_transform(
    handle: *const Salem2dMeasure,
    k: usize,
    xi_x: f64,
    xi_y: f64,
    out_re: *mut f64,
    out_im: *mut f64,
    error: *mut f64,
) -> Salem2dStatus {
    guard(|| {
        let m = handle.as_ref().ok_or_else(|| fail(Salem2dStatus::NullPointer, "handle is null"))?;
        let (r, i) = (out(out_re, "out_re")?, out(out_im, "out_im")?);
        let t = m.0.stage_transform(k, [xi_x, xi_y]).map_err(lib)?;
        *r = t.value.re;
        *i = t.value.im;
        if let Some(e) = error.as_mut() {
            *e = t.error;
        }
        Ok(())
    })
}
