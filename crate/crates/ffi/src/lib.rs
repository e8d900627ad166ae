//! C ABI over the suffbench core.
//!
//! Models and statistics cross the boundary as opaque handles created from
//! JSON text and released with the matching `_free` function. Every call
//! returns an [`SbStatus`]; on failure the precise error code and message
//! are available from [`sb_last_error_code`] and [`sb_last_error_message`]
//! on the calling thread. Panics never unwind into C.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use suffbench::error::Error;
use suffbench::modelfile::{parse_statistics, ModelFile};
use suffbench::source_coding::corner_point;
use suffbench::statistic::Statistic;
use suffbench::sufficiency::{is_conditionally_sufficient, is_sufficient, minimal_sufficient};
use suffbench::ParamFamily;

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Shape = 4,
    Normalization = 5,
    Domain = 6,
    Precondition = 7,
    OutOfRange = 8,
    Io = 9,
    BufferTooSmall = 10,
    Panic = 11,
}

/// Parsed model file (family or joint distribution).
pub struct SbModel {
    inner: ModelFile,
}

/// Canonical partition of one model axis.
pub struct SbStatistic {
    inner: Statistic,
}

thread_local! {
    static LAST_ERROR: RefCell<(CString, CString)> = RefCell::new((CString::default(), CString::default()));
}

fn set_error(code: &str, message: &str) {
    let clean = |s: &str| CString::new(s.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = (clean(code), clean(message)));
}

fn status_of(e: &Error) -> SbStatus {
    match e.code() {
        "PARSE" => SbStatus::Parse,
        "SHAPE_MISMATCH" | "DUPLICATE_SYMBOL" | "DUPLICATE_AXIS" | "TOO_LARGE" | "EMPTY_AXIS_SET" => SbStatus::Shape,
        "NEGATIVE_PROB" | "NORMALIZATION" | "NONFINITE_INPUT" => SbStatus::Normalization,
        "UNKNOWN_AXIS" | "UNKNOWN_SYMBOL" | "MISSING_SYMBOL" | "AXIS_OVERLAP" | "SAME_DOMAIN" | "DOMAIN_MISMATCH" => {
            SbStatus::Domain
        }
        "PRECONDITION_FAILED" | "COMPOSITION_MISMATCH" | "ZERO_EVENT" => SbStatus::Precondition,
        "IO" => SbStatus::Io,
        _ => SbStatus::OutOfRange,
    }
}

/// Runs `f`, recording errors and containing panics.
fn guard(f: impl FnOnce() -> Result<(), (SbStatus, String, String)>) -> SbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("", "");
            SbStatus::Ok
        }
        Ok(Err((status, code, msg))) => {
            set_error(&code, &msg);
            status
        }
        Err(_) => {
            set_error("PANIC", "internal panic");
            SbStatus::Panic
        }
    }
}

type Failure = (SbStatus, String, String);

fn fail(e: Error) -> Failure {
    (status_of(&e), e.code().to_string(), e.to_string())
}

fn null(what: &str) -> Failure {
    (SbStatus::NullPointer, "NULL_POINTER".into(), format!("{what} is null"))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (SbStatus::InvalidUtf8, "INVALID_UTF8".into(), format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn family_of(m: &SbModel) -> Result<&ParamFamily, Failure> {
    m.inner.family().map_err(fail)
}

/// Family restricted to the statistic's axis unless it covers all observations.
fn family_for(f: &ParamFamily, t: &Statistic) -> Result<ParamFamily, Failure> {
    let axis = t.domain().name();
    if axis == f.obs_alphabet().name() {
        Ok(f.clone())
    } else {
        f.marginal_family(&[axis]).map_err(fail)
    }
}

/// Error code of the last failed call on this thread ("" after success).
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sb_last_error_code() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().0.as_ptr())
}

/// Human-readable message of the last failed call on this thread.
#[no_mangle]
pub extern "C" fn sb_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().1.as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn sb_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a JSON model file body.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn sb_model_from_json(json: *const c_char, out: *mut *mut SbModel) -> SbStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let m = ModelFile::parse(text(json, "json")?).map_err(fail)?;
        *out = Box::into_raw(Box::new(SbModel { inner: m }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`sb_model_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sb_model_free(model: *mut SbModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Parses one `{axis, map}` statistic against the axes of `model`.
///
/// # Safety
/// Pointers must be valid; `json` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sb_statistic_from_json(
    model: *const SbModel,
    json: *const c_char,
    out: *mut *mut SbStatistic,
) -> SbStatus {
    guard(|| {
        let m = handle(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mut stats = parse_statistics(text(json, "json")?, &|name| m.inner.alphabet(name)).map_err(fail)?;
        if stats.len() != 1 {
            return Err(fail(Error::Parse(format!("expected one statistic, got {}", stats.len()))));
        }
        *out = Box::into_raw(Box::new(SbStatistic { inner: stats.remove(0) }));
        Ok(())
    })
}

/// # Safety
/// `stat` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sb_statistic_free(stat: *mut SbStatistic) {
    if !stat.is_null() {
        drop(Box::from_raw(stat));
    }
}

/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_statistic_num_classes(stat: *const SbStatistic, out: *mut usize) -> SbStatus {
    guard(|| {
        let s = handle(stat, "stat")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = s.inner.num_classes();
        Ok(())
    })
}

/// Copies the class label of every domain symbol into `buf`. `written`
/// receives the domain size; if `len` is smaller, nothing is copied and
/// `SB_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `buf` must hold `len` writable entries; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_statistic_labels(
    stat: *const SbStatistic,
    buf: *mut usize,
    len: usize,
    written: *mut usize,
) -> SbStatus {
    guard(|| {
        let s = handle(stat, "stat")?;
        if written.is_null() {
            return Err(null("written"));
        }
        let labels = s.inner.labels();
        *written = labels.len();
        if len < labels.len() {
            return Err((SbStatus::BufferTooSmall, "BUFFER_TOO_SMALL".into(), format!("need {} entries", labels.len())));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(labels.as_ptr(), buf, labels.len());
        Ok(())
    })
}

/// θ − T(X) − X for a statistic on all observations or on one axis.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_is_sufficient(
    model: *const SbModel,
    stat: *const SbStatistic,
    threshold_bits: f64,
    holds: *mut bool,
    cmi_bits: *mut f64,
) -> SbStatus {
    guard(|| {
        let (m, s) = (handle(model, "model")?, handle(stat, "stat")?);
        if holds.is_null() || cmi_bits.is_null() {
            return Err(null("output"));
        }
        let fam = family_for(family_of(m)?, &s.inner)?;
        let v = is_sufficient(&fam, &s.inner, threshold_bits).map_err(fail)?;
        *holds = v.holds;
        *cmi_bits = v.cmi_bits;
        Ok(())
    })
}

/// θ − (T(X), Y) − X with X the statistic's axis and Y `given_axis`.
///
/// # Safety
/// Pointers must be valid; `given_axis` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn sb_is_conditionally_sufficient(
    model: *const SbModel,
    stat: *const SbStatistic,
    given_axis: *const c_char,
    threshold_bits: f64,
    holds: *mut bool,
    cmi_bits: *mut f64,
) -> SbStatus {
    guard(|| {
        let (m, s) = (handle(model, "model")?, handle(stat, "stat")?);
        let y = text(given_axis, "given_axis")?;
        if holds.is_null() || cmi_bits.is_null() {
            return Err(null("output"));
        }
        let v = is_conditionally_sufficient(family_of(m)?, &s.inner, y, threshold_bits).map_err(fail)?;
        *holds = v.holds;
        *cmi_bits = v.cmi_bits;
        Ok(())
    })
}

/// Minimal sufficient statistic on all observations, or on `axis` when it
/// is non-null.
///
/// # Safety
/// Pointers must be valid; `axis` may be null.
#[no_mangle]
pub unsafe extern "C" fn sb_minimal_sufficient(
    model: *const SbModel,
    axis: *const c_char,
    out: *mut *mut SbStatistic,
) -> SbStatus {
    guard(|| {
        let m = handle(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        let f = family_of(m)?;
        let fam = if axis.is_null() { f.clone() } else { f.marginal_family(&[text(axis, "axis")?]).map_err(fail)? };
        *out = Box::into_raw(Box::new(SbStatistic { inner: minimal_sufficient(&fam) }));
        Ok(())
    })
}

/// Entropy in bits of the minimal sufficient statistic of Y for X, with
/// the model read as an (X, Y) source.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_corner_point(model: *const SbModel, out: *mut f64) -> SbStatus {
    guard(|| {
        let m = handle(model, "model")?;
        if out.is_null() {
            return Err(null("out"));
        }
        *out = corner_point(&m.inner.source_pair().map_err(fail)?);
        Ok(())
    })
}

/// Runs a command-line invocation (`argv[0]` is the program name) and
/// returns its JSON report in `report` (free with [`sb_string_free`]) and
/// its exit code in `exit_code`.
///
/// # Safety
/// `argv` must hold `argc` NUL-terminated strings; outputs must be valid.
#[no_mangle]
pub unsafe extern "C" fn sb_run(
    argc: usize,
    argv: *const *const c_char,
    report: *mut *mut c_char,
    exit_code: *mut i32,
) -> SbStatus {
    guard(|| {
        if argv.is_null() || report.is_null() || exit_code.is_null() {
            return Err(null("argument"));
        }
        let args: Vec<String> = (0..argc)
            .map(|i| text(*argv.add(i), "argv entry").map(str::to_string))
            .collect::<Result<_, _>>()?;
        let r = suffbench::cli::run(args);
        let body = r.help.clone().unwrap_or_else(|| r.to_json());
        *report = CString::new(body).unwrap_or_default().into_raw();
        *exit_code = r.exit_code;
        Ok(())
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sb_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
