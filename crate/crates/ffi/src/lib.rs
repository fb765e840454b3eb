//! C ABI over the `ksreduce` core.
//!
//! Operators and coefficients cross the boundary as opaque handles that the
//! caller releases with the matching `_free` function. Every entry point
//! returns a [`KsStatus`]; on failure the message is kept per thread and can
//! be fetched with [`ks_last_error`]. Strings handed out by this library are
//! released with [`ks_string_free`]. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ksreduce::cli::format::{format_coeff, format_operator};
use ksreduce::cli::parse::{parse_coeff, parse_operator};
use ksreduce::hydrogen::admissible_energy;
use ksreduce::ksfib::{descend, is_projectable, project, pullback};
use ksreduce::spectral::x3_kernel_dimension;
use ksreduce::{Chart, Coeff, DiffOp, Error, Q};

pub const KS_CHART_R3: u32 = 3;
pub const KS_CHART_R4: u32 = 4;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidArgument = 4,
    ChartMismatch = 5,
    NotFiberInvariant = 6,
    NotDescendable = 7,
    NotProjectable = 8,
    Unsupported = 9,
    Internal = 10,
    Panic = 11,
}

/// Opaque differential operator.
pub struct KsOperator(DiffOp);

/// Opaque coefficient function.
pub struct KsCoeff(Coeff);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KsStatus {
    match e {
        Error::Parse { .. } | Error::UnknownCoordinate { .. } => KsStatus::Parse,
        Error::ChartMismatch { .. } => KsStatus::ChartMismatch,
        Error::NotFiberInvariant { .. } => KsStatus::NotFiberInvariant,
        Error::NotDescendable(_) => KsStatus::NotDescendable,
        Error::NotProjectable { .. } => KsStatus::NotProjectable,
        Error::InvalidArgument(_) | Error::NonSeparable => KsStatus::InvalidArgument,
        Error::Unsupported(_) => KsStatus::Unsupported,
        Error::Quadrature(_) | Error::Internal(_) => KsStatus::Internal,
    }
}

struct Failure(KsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> KsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            KsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            KsStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(Failure(KsStatus::NullPointer, "null string argument".into()));
    }
    CStr::from_ptr(s).to_str().map_err(|_| Failure(KsStatus::InvalidUtf8, "argument is not valid UTF-8".into()))
}

fn chart(c: u32) -> Result<Chart, Failure> {
    match c {
        KS_CHART_R3 => Ok(Chart::R3),
        KS_CHART_R4 => Ok(Chart::R4),
        _ => Err(Failure(KsStatus::InvalidArgument, format!("unknown chart {c}"))),
    }
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(KsStatus::NullPointer, "null handle".into()))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(KsStatus::NullPointer, "null output pointer".into()));
    }
    out.write(value);
    Ok(())
}

fn rational(num: i64, den: i64) -> Result<Q, Failure> {
    if den == 0 {
        return Err(Failure(KsStatus::InvalidArgument, "zero denominator".into()));
    }
    Ok(Q::new(num.into(), den.into()))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).map(CString::into_raw).unwrap_or(ptr::null_mut())
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn ks_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ks_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parse an operator literal on chart `KS_CHART_R3` or `KS_CHART_R4`.
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ks_operator_parse(text: *const c_char, chart_id: u32, out: *mut *mut KsOperator) -> KsStatus {
    guard(|| {
        let d = parse_operator(read_str(text)?, chart(chart_id)?)?;
        write_out(out, Box::into_raw(Box::new(KsOperator(d))))
    })
}

/// # Safety
/// `op` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ks_operator_free(op: *mut KsOperator) {
    if !op.is_null() {
        drop(Box::from_raw(op));
    }
}

/// Canonical text of `op`, or null on failure. Free with [`ks_string_free`].
///
/// # Safety
/// `op` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_operator_to_string(op: *const KsOperator) -> *mut c_char {
    match op.as_ref() {
        Some(d) => into_c_string(format_operator(&d.0)),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_operator_degree(op: *const KsOperator, out: *mut u32) -> KsStatus {
    guard(|| write_out(out, handle(op)?.0.degree()))
}

/// `[a, b]` as a new handle.
///
/// # Safety
/// `a`, `b` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_operator_commutator(
    a: *const KsOperator,
    b: *const KsOperator,
    out: *mut *mut KsOperator,
) -> KsStatus {
    guard(|| {
        let c = handle(a)?.0.commutator(&handle(b)?.0)?;
        write_out(out, Box::into_raw(Box::new(KsOperator(c))))
    })
}

/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_operator_is_projectable(op: *const KsOperator, out: *mut bool) -> KsStatus {
    guard(|| write_out(out, is_projectable(&handle(op)?.0)?))
}

/// Projection of a 4D operator to the 3D chart as a new handle.
///
/// # Safety
/// `op` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_operator_project(op: *const KsOperator, out: *mut *mut KsOperator) -> KsStatus {
    guard(|| {
        let p = project(&handle(op)?.0)?;
        write_out(out, Box::into_raw(Box::new(KsOperator(p))))
    })
}

/// Parse a coefficient literal (no derivatives).
///
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_coeff_parse(text: *const c_char, chart_id: u32, out: *mut *mut KsCoeff) -> KsStatus {
    guard(|| {
        let c = parse_coeff(read_str(text)?, chart(chart_id)?)?;
        write_out(out, Box::into_raw(Box::new(KsCoeff(c))))
    })
}

/// # Safety
/// `c` must be null or a handle from this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn ks_coeff_free(c: *mut KsCoeff) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Canonical text of `c`, or null on failure. Free with [`ks_string_free`].
///
/// # Safety
/// `c` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ks_coeff_to_string(c: *const KsCoeff) -> *mut c_char {
    match c.as_ref() {
        Some(c) => into_c_string(format_coeff(&c.0)),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_coeff_pullback(c: *const KsCoeff, out: *mut *mut KsCoeff) -> KsStatus {
    guard(|| {
        let p = pullback(&handle(c)?.0)?;
        write_out(out, Box::into_raw(Box::new(KsCoeff(p))))
    })
}

/// # Safety
/// `c` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ks_coeff_descend(c: *const KsCoeff, out: *mut *mut KsCoeff) -> KsStatus {
    guard(|| {
        let d = descend(&handle(c)?.0)?;
        write_out(out, Box::into_raw(Box::new(KsCoeff(d))))
    })
}

/// Admissible energy `-2k^2/(n+2)^2` as a reduced fraction.
///
/// # Safety
/// `num` and `den` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_admissible_energy(
    k_num: i64,
    k_den: i64,
    n: u32,
    num: *mut i64,
    den: *mut i64,
) -> KsStatus {
    guard(|| {
        let e = admissible_energy(&rational(k_num, k_den)?, n);
        let overflow = || Failure(KsStatus::InvalidArgument, "result does not fit in 64 bits".into());
        let p: i64 = e.numer().try_into().map_err(|_| overflow())?;
        let q: i64 = e.denom().try_into().map_err(|_| overflow())?;
        write_out(num, p)?;
        write_out(den, q)
    })
}

/// Multiplicity of the fiber-invariant part of oscillator level `n` at coupling `k`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ks_kernel_dimension(n: u32, k_num: i64, k_den: i64, out: *mut usize) -> KsStatus {
    guard(|| write_out(out, x3_kernel_dimension(n, &rational(k_num, k_den)?)?))
}
