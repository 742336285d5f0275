//! C ABI over the moment-problem solvers.
//!
//! Callers parse a moment table once into an opaque handle, run any number
//! of solves against it, and free the handle when done. Reports come back
//! as JSON strings with the same schema the command-line tool prints.
//! Every string returned by this library must be released with
//! `mc_string_free`, and every handle with `mc_moments_free`.
//!
//! All functions are panic-safe: a panic inside the library is caught and
//! surfaced as `MC_ERR_PANIC` instead of unwinding across the boundary.
//! Error details are kept per thread and read back with `mc_last_error`.

use momentcurve::cubic_circular::solve_circular;
use momentcurve::cubic_parabolic::solve_parabolic_cubic;
use momentcurve::error::Error;
use momentcurve::exactmath::{rat_from_str, Rat};
use momentcurve::moments::MomentSequence;
use num_traits::Zero;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

pub use momentcurve;

/// Success.
pub const MC_OK: i32 = 0;
/// A required pointer argument was null.
pub const MC_ERR_NULL: i32 = 1;
/// The input could not be parsed or fails a precondition.
pub const MC_ERR_INVALID: i32 = 2;
/// The numeric extraction path missed its tolerance.
pub const MC_ERR_NUMERIC: i32 = 3;
/// A string argument was not valid UTF-8.
pub const MC_ERR_UTF8: i32 = 4;
/// The library panicked; the handle is still valid, the result is not.
pub const MC_ERR_PANIC: i32 = 5;

/// An immutable parsed moment table of total degree 2k.
pub struct McMoments {
    seq: MomentSequence<Rat>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized: String = msg.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn error_code(e: &Error) -> i32 {
    match e.exit_code() {
        3 => MC_ERR_NUMERIC,
        _ => MC_ERR_INVALID,
    }
}

/// Last error message recorded on the calling thread, empty when the last
/// call succeeded. The pointer stays valid until the next failing call on
/// the same thread; do not free it.
#[no_mangle]
pub extern "C" fn mc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

fn guarded<F: FnOnce() -> i32>(f: F) -> i32 {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(code) => code,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic without message".into());
            set_error(&format!("internal panic: {msg}"));
            MC_ERR_PANIC
        }
    }
}

/// # Safety
/// `s` must be null or a valid NUL-terminated C string.
unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, i32> {
    if s.is_null() {
        set_error("null string argument");
        return Err(MC_ERR_NULL);
    }
    CStr::from_ptr(s).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        MC_ERR_UTF8
    })
}

fn write_out(out: *mut *mut c_char, text: String) -> i32 {
    let cstring = match CString::new(text) {
        Ok(c) => c,
        Err(_) => {
            set_error("report contained an interior NUL byte");
            return MC_ERR_PANIC;
        }
    };
    unsafe { *out = cstring.into_raw() };
    MC_OK
}

/// Parses moment JSON `{"k": k, "moments": [{"i", "j", "v"}]}` into a
/// handle. Returns null on error; the reason is in `mc_last_error`.
///
/// # Safety
/// `json` must be null or a valid NUL-terminated C string.
#[no_mangle]
pub unsafe extern "C" fn mc_moments_parse(json: *const c_char) -> *mut McMoments {
    let mut result: *mut McMoments = std::ptr::null_mut();
    guarded(|| {
        let text = match read_str(json) {
            Ok(t) => t,
            Err(code) => return code,
        };
        match momentcurve::cli::parse_moments_str(text) {
            Ok(seq) => {
                result = Box::into_raw(Box::new(McMoments { seq }));
                MC_OK
            }
            Err(e) => {
                set_error(&e.to_string());
                error_code(&e)
            }
        }
    });
    result
}

/// Releases a handle returned by `mc_moments_parse`. Null is a no-op.
///
/// # Safety
/// `handle` must be null or a pointer obtained from `mc_moments_parse`
/// that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn mc_moments_free(handle: *mut McMoments) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Releases a string returned through an `out_json` parameter. Null is a
/// no-op.
///
/// # Safety
/// `s` must be null or a string pointer this library returned that has not
/// been freed yet.
#[no_mangle]
pub unsafe extern "C" fn mc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn solve_common(
    handle: *const McMoments,
    out_json: *mut *mut c_char,
    run: impl FnOnce(&MomentSequence<Rat>) -> momentcurve::Result<serde_json::Value>,
) -> i32 {
    if handle.is_null() || out_json.is_null() {
        set_error("null handle or output pointer");
        return MC_ERR_NULL;
    }
    let seq = &(*handle).seq;
    match run(seq) {
        Ok(value) => write_out(out_json, value.to_string()),
        Err(e) => {
            set_error(&e.to_string());
            error_code(&e)
        }
    }
}

/// Decides existence for the family a y + x^2 + y^2 = 0 with the rational
/// circle parameter `a` given as `num/den`. On success writes the report
/// JSON to `*out_json`.
///
/// # Safety
/// `handle` must be a live handle from `mc_moments_parse`, `a` a valid
/// NUL-terminated C string, and `out_json` a valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn mc_solve_circular(
    handle: *const McMoments,
    a: *const c_char,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let a = match read_str(a) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let a = match rat_from_str(a) {
            Some(a) if !a.is_zero() => a,
            _ => {
                set_error("circle parameter must be a nonzero rational num/den");
                return MC_ERR_INVALID;
            }
        };
        solve_common(handle, out_json, |seq| {
            solve_circular(seq, &a).map(|r| r.to_json())
        })
    })
}

/// Decides existence for the family x = y^2. On success writes the report
/// JSON to `*out_json`.
///
/// # Safety
/// `handle` must be a live handle from `mc_moments_parse` and `out_json` a
/// valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn mc_solve_parabolic(
    handle: *const McMoments,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        solve_common(handle, out_json, |seq| {
            solve_parabolic_cubic(seq).map(|r| r.to_json())
        })
    })
}

/// Detects the cubic column relation, reduces it to canonical form, and
/// writes the classification JSON to `*out_json`.
///
/// # Safety
/// `handle` must be a live handle from `mc_moments_parse` and `out_json` a
/// valid destination pointer.
#[no_mangle]
pub unsafe extern "C" fn mc_classify(
    handle: *const McMoments,
    out_json: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        solve_common(handle, out_json, momentcurve::cli::classify_value)
    })
}

/// Size (k+1)(k+2)/2 of the moment matrix behind the handle, or 0 for a
/// null handle.
///
/// # Safety
/// `handle` must be null or a live handle from `mc_moments_parse`.
#[no_mangle]
pub unsafe extern "C" fn mc_matrix_size(handle: *const McMoments) -> usize {
    if handle.is_null() {
        return 0;
    }
    let k = (*handle).seq.k();
    (k + 1) * (k + 2) / 2
}
