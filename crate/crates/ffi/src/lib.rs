//! C ABI over the `qprop` scenario engine.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `*_free` function. Every fallible call returns a [`QpStatus`]
//! and, on failure, leaves a message for [`qp_last_error`] on the calling
//! thread. Panics never cross the boundary; they surface as
//! `QP_STATUS_INTERNAL`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qprop::cli::{execute, exit_code_for, Invocation, EXIT_USAGE};
use qprop::scenario::{parse_scenario, Scenario};
use qprop::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not UTF-8.
    InvalidUtf8 = 2,
    /// The scenario text was malformed or violated a structural rule.
    ParseError = 3,
    /// An internal consistency check failed.
    InvariantViolation = 4,
    /// A configured enumeration or work bound would be exceeded.
    BoundExceeded = 5,
    /// The command line or its arguments were invalid for this scenario.
    Usage = 6,
    /// A panic or an unexpected condition.
    Internal = 7,
}

/// A parsed scenario with its closed context family.
pub struct QpScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_for(err: &Error) -> QpStatus {
    match err {
        Error::BoundExceeded { .. } => QpStatus::BoundExceeded,
        Error::Invariant(_) | Error::NotClosed(_) | Error::InvalidSection(_) => QpStatus::InvariantViolation,
        Error::Usage(_) | Error::UnknownContext(_) | Error::NotInLattice => QpStatus::Usage,
        Error::NotACondition | Error::EmptyEvent | Error::BadSign(_) => QpStatus::Internal,
        _ => QpStatus::ParseError,
    }
}

/// Runs `body`, records any error and converts panics.
fn guard(body: impl FnOnce() -> Result<(), (QpStatus, String)>) -> QpStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => QpStatus::Ok,
        Ok(Err((status, message))) => {
            set_last_error(&message);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            QpStatus::Internal
        }
    }
}

fn lib_err(err: Error) -> (QpStatus, String) {
    (status_for(&err), err.to_string())
}

fn null(what: &str) -> (QpStatus, String) {
    (QpStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `s` must be null or point to a NUL-terminated string.
unsafe fn read_str<'a>(s: *const c_char, what: &str) -> Result<&'a str, (QpStatus, String)> {
    if s.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (QpStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

/// # Safety
/// `handle` must be null or a live pointer from [`qp_scenario_parse`].
unsafe fn scenario<'a>(handle: *const QpScenario) -> Result<&'a Scenario, (QpStatus, String)> {
    handle.as_ref().map(|h| &h.inner).ok_or_else(|| null("scenario handle"))
}

fn into_c_string(text: String) -> Result<*mut c_char, (QpStatus, String)> {
    CString::new(text)
        .map(CString::into_raw)
        .map_err(|_| (QpStatus::Internal, "output contains a NUL byte".into()))
}

fn rational_parts(q: &qprop::scalar::Rational) -> Option<(i64, i64)> {
    Some((i64::try_from(q.numer()).ok()?, i64::try_from(q.denom()).ok()?))
}

/// Parses a scenario from TOML text.
///
/// On success `*out` receives a new handle; free it with [`qp_scenario_free`].
///
/// # Safety
/// `toml` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn qp_scenario_parse(toml: *const c_char, out: *mut *mut QpScenario) -> QpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let text = read_str(toml, "toml")?;
        let inner = parse_scenario(text).map_err(|e| {
            let status = match status_for(&e) {
                QpStatus::Usage => QpStatus::ParseError,
                s => s,
            };
            (status, e.to_string())
        })?;
        *out = Box::into_raw(Box::new(QpScenario { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must be null or a pointer from [`qp_scenario_parse`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_scenario_free(handle: *mut QpScenario) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Hilbert-space dimension.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_scenario_dim(handle: *const QpScenario, out: *mut usize) -> QpStatus {
    guard(|| {
        let scn = scenario(handle)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = scn.dim;
        Ok(())
    })
}

/// Number of contexts in the closed family, C1 included.
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_family_size(handle: *const QpScenario, out: *mut usize) -> QpStatus {
    guard(|| {
        let scn = scenario(handle)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = scn.family().len();
        Ok(())
    })
}

/// Runs one CLI command (e.g. `"cps audit --family delta"`) on the scenario.
///
/// `*out_text` receives the command's standard output, to be released with
/// [`qp_string_free`], and `*exit_code` the code the CLI would exit with. A
/// command that runs and reports a failed check returns `QP_STATUS_OK` with
/// exit code 1. On error `*out_text` is null and `*exit_code` is still set.
///
/// # Safety
/// `handle` must be a live handle, `command` a NUL-terminated string, and
/// `out_text` and `exit_code` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_run(
    handle: *const QpScenario,
    command: *const c_char,
    out_text: *mut *mut c_char,
    exit_code: *mut i32,
) -> QpStatus {
    guard(|| {
        if out_text.is_null() || exit_code.is_null() {
            return Err(null("output pointer"));
        }
        *out_text = ptr::null_mut();
        *exit_code = EXIT_USAGE;
        let scn = scenario(handle)?;
        let line = read_str(command, "command")?;
        let cmd = Invocation::parse_line(line).map_err(lib_err)?;
        match execute(scn, &cmd) {
            Ok(out) => {
                *out_text = into_c_string(out.text)?;
                *exit_code = out.exit_code;
                Ok(())
            }
            Err(e) => {
                *exit_code = exit_code_for(&e);
                Err(lib_err(e))
            }
        }
    })
}

/// Exact CHSH value `num/den` for a scenario with a `[bell]` table.
///
/// # Safety
/// `handle` must be a live handle; `num` and `den` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_bell_chsh(handle: *const QpScenario, num: *mut i64, den: *mut i64) -> QpStatus {
    guard(|| {
        let scn = scenario(handle)?;
        if num.is_null() || den.is_null() {
            return Err(null("output pointer"));
        }
        let bell = scn
            .bell()
            .ok_or_else(|| (QpStatus::Usage, "scenario has no [bell] table".to_string()))?;
        let s = bell.chsh().map_err(lib_err)?;
        let (n, d) = rational_parts(&s).ok_or_else(|| {
            (
                QpStatus::BoundExceeded,
                "CHSH value does not fit in 64 bits".to_string(),
            )
        })?;
        *num = n;
        *den = d;
        Ok(())
    })
}

/// Canonical TOML for the scenario, to be released with [`qp_string_free`].
///
/// # Safety
/// `handle` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn qp_scenario_to_toml(handle: *const QpScenario, out: *mut *mut c_char) -> QpStatus {
    guard(|| {
        let scn = scenario(handle)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = into_c_string(scn.to_toml_string())?;
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must be null or a string from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null.
///
/// The pointer stays valid until the next call into this library on the same
/// thread; do not free it.
#[no_mangle]
pub extern "C" fn qp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
