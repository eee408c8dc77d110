//! C ABI for the complex-volume pipeline.
//!
//! The entry point is `cvol_compute_pd`, which parses a PD code, solves
//! for parabolic colorings, evaluates the maximal-volume class, and
//! hands back an opaque result handle. Status codes mirror the CLI exit
//! codes. All returned strings are owned by Rust and must be released
//! with `cvol_string_free`; handles with `cvol_result_free`.

use cvol::pipeline::{compute_from_pd_text, ComplexVolumeResult, PipelineError, Tolerances};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

/// Status codes returned by the compute entry points.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CvolStatus {
    Ok = 0,
    /// Invalid arguments (null pointers, bad UTF-8).
    Usage = 1,
    /// PD text or JSON could not be parsed into a planar diagram.
    ParseError = 2,
    /// No irreducible parabolic coloring was found.
    SolverFailure = 3,
    /// The lift stayed degenerate or the coloring is reducible.
    Degeneracy = 4,
    /// Numerical breakdown (integrality, closedness, consistency).
    Numerical = 5,
}

impl From<&PipelineError> for CvolStatus {
    fn from(e: &PipelineError) -> Self {
        match e.exit_code() {
            2 => CvolStatus::ParseError,
            3 => CvolStatus::SolverFailure,
            4 => CvolStatus::Degeneracy,
            _ => CvolStatus::Numerical,
        }
    }
}

/// Opaque result handle.
pub struct CvolResult {
    inner: ComplexVolumeResult,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Compute the complex volume of the link described by a PD code
/// (text grammar or JSON). On success writes a handle to `out` and
/// returns `Ok`; on failure returns a status and leaves a message
/// retrievable via `cvol_last_error_message`.
///
/// # Safety
/// `pd_text` must be a valid NUL-terminated string and `out` a valid
/// pointer; the returned handle must be released with `cvol_result_free`.
#[no_mangle]
pub unsafe extern "C" fn cvol_compute_pd(
    pd_text: *const c_char,
    seed: u64,
    attempts: u32,
    tol: f64,
    out: *mut *mut CvolResult,
) -> CvolStatus {
    if pd_text.is_null() || out.is_null() {
        set_last_error("null pointer argument".into());
        return CvolStatus::Usage;
    }
    *out = ptr::null_mut();
    let text = match CStr::from_ptr(pd_text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_last_error("PD text is not valid UTF-8".into());
            return CvolStatus::Usage;
        }
    };
    let tols = if tol > 0.0 {
        Tolerances::scaled(tol)
    } else {
        Tolerances::default()
    };
    let attempts = if attempts == 0 { 50 } else { attempts as usize };
    match compute_from_pd_text(text, seed, attempts, &tols) {
        Ok(outcome) => {
            let best = outcome.classes[outcome.best].result.clone();
            *out = Box::into_raw(Box::new(CvolResult { inner: best }));
            CvolStatus::Ok
        }
        Err(e) => {
            let status = CvolStatus::from(&e);
            set_last_error(e.to_string());
            status
        }
    }
}

/// Hyperbolic volume (imaginary part of the evaluation).
///
/// # Safety
/// `result` must be a live handle from `cvol_compute_pd`.
#[no_mangle]
pub unsafe extern "C" fn cvol_result_volume(result: *const CvolResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.volume)
}

/// Chern-Simons invariant, reduced mod π² to (−π²/2, π²/2].
///
/// # Safety
/// `result` must be a live handle from `cvol_compute_pd`.
#[no_mangle]
pub unsafe extern "C" fn cvol_result_cs(result: *const CvolResult) -> f64 {
    result.as_ref().map_or(f64::NAN, |r| r.inner.cs)
}

/// Raw evaluation i(Vol + i CS) mod π² as (re, im).
///
/// # Safety
/// `result` must be live; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn cvol_result_raw(
    result: *const CvolResult,
    re: *mut f64,
    im: *mut f64,
) {
    if let Some(r) = result.as_ref() {
        if !re.is_null() {
            *re = r.inner.raw.re;
        }
        if !im.is_null() {
            *im = r.inner.raw.im;
        }
    }
}

/// Number of ideal tetrahedra in the evaluated chain.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cvol_result_tetrahedra(result: *const CvolResult) -> u32 {
    result.as_ref().map_or(0, |r| r.inner.tets.0.len() as u32)
}

/// Full result artifact as a JSON string (same schema as the CLI
/// `--out` file). Free with `cvol_string_free`. NULL on error.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn cvol_result_json(result: *const CvolResult) -> *mut c_char {
    let Some(r) = result.as_ref() else {
        return ptr::null_mut();
    };
    let text = serde_json::to_string(&r.inner.to_json()).unwrap_or_default();
    CString::new(text).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message describing the most recent failure on this thread, or NULL.
/// Free with `cvol_string_free`.
#[no_mangle]
pub extern "C" fn cvol_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|e| {
        e.borrow()
            .as_ref()
            .map_or(ptr::null_mut(), |c| c.clone().into_raw())
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must have been returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cvol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a result handle.
///
/// # Safety
/// `result` must have been returned by `cvol_compute_pd` and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn cvol_result_free(result: *mut CvolResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}
