//! C ABI over the khovacable engine.
//!
//! Diagrams are opaque handles. Every fallible call returns a `KcStatus`;
//! on failure `kc_last_error` gives a message for the calling thread.
//! Strings handed out by this library are released with `kc_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use khovacable::bicomplex::{build_bicomplex, BicomplexError, BicomplexOptions};
use khovacable::diagram::{parse_diagram, ColorTuple, FramedLinkDiagram};
use khovacable::khovanov::{graded_euler, homology, KhovanovComplex, KhovanovError};
use khovacable::polyoracle::{colored_jones, jones, OracleError};
use serde_json::json;

/// Opaque parsed diagram.
pub struct KcDiagram {
    inner: FramedLinkDiagram,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InputError = 3,
    IdentityFailure = 4,
    CapExceeded = 5,
    Panic = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(s));
}

struct Fail(KcStatus, String);

impl From<OracleError> for Fail {
    fn from(e: OracleError) -> Self {
        let st = match e {
            OracleError::CapExceeded { .. } => KcStatus::CapExceeded,
            OracleError::HalfInteger { .. } => KcStatus::IdentityFailure,
            _ => KcStatus::InputError,
        };
        Fail(st, e.to_string())
    }
}

impl From<KhovanovError> for Fail {
    fn from(e: KhovanovError) -> Self {
        let st = match e {
            KhovanovError::CapExceeded { .. } => KcStatus::CapExceeded,
            _ => KcStatus::IdentityFailure,
        };
        Fail(st, e.to_string())
    }
}

impl From<BicomplexError> for Fail {
    fn from(e: BicomplexError) -> Self {
        let st = match &e {
            BicomplexError::CapExceeded { .. }
            | BicomplexError::Khovanov(KhovanovError::CapExceeded { .. }) => KcStatus::CapExceeded,
            BicomplexError::Diagram(_) => KcStatus::InputError,
            _ => KcStatus::IdentityFailure,
        };
        Fail(st, e.to_string())
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> KcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KcStatus::Ok,
        Ok(Err(Fail(st, msg))) => {
            set_error(msg);
            st
        }
        Err(_) => {
            set_error("internal panic");
            KcStatus::Panic
        }
    }
}

fn cap_or_default(cap: u64) -> u128 {
    if cap == 0 {
        khovacable::DEFAULT_CAP
    } else {
        u128::from(cap)
    }
}

unsafe fn diagram<'a>(d: *const KcDiagram) -> Result<&'a FramedLinkDiagram, Fail> {
    d.as_ref()
        .map(|d| &d.inner)
        .ok_or_else(|| Fail(KcStatus::NullPointer, "null diagram handle".into()))
}

unsafe fn colors(ptr: *const u32, len: usize) -> Result<ColorTuple, Fail> {
    if ptr.is_null() {
        return Err(Fail(KcStatus::NullPointer, "null color array".into()));
    }
    Ok(ColorTuple(std::slice::from_raw_parts(ptr, len).to_vec()))
}

unsafe fn emit(out: *mut *mut c_char, v: &serde_json::Value) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(KcStatus::NullPointer, "null output pointer".into()));
    }
    let s = CString::new(v.to_string()).expect("json has no NUL");
    *out = s.into_raw();
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library and valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Parses a PD-code JSON document into a new handle.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn kc_diagram_parse(json: *const c_char, out: *mut *mut KcDiagram) -> KcStatus {
    guard(|| {
        if json.is_null() || out.is_null() {
            return Err(Fail(KcStatus::NullPointer, "null argument".into()));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Fail(KcStatus::InvalidUtf8, e.to_string()))?;
        let d = parse_diagram(text).map_err(|e| Fail(KcStatus::InputError, e.to_string()))?;
        *out = Box::into_raw(Box::new(KcDiagram { inner: d }));
        Ok(())
    })
}

/// # Safety
/// `d` must come from `kc_diagram_parse` and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn kc_diagram_free(d: *mut KcDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kc_diagram_writhe(d: *const KcDiagram, out: *mut i64) -> KcStatus {
    guard(|| {
        let d = diagram(d)?;
        if out.is_null() {
            return Err(Fail(KcStatus::NullPointer, "null output pointer".into()));
        }
        *out = d.writhe();
        Ok(())
    })
}

/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kc_diagram_crossings(d: *const KcDiagram, out: *mut usize) -> KcStatus {
    guard(|| {
        let d = diagram(d)?;
        if out.is_null() {
            return Err(Fail(KcStatus::NullPointer, "null output pointer".into()));
        }
        *out = d.crossing_count();
        Ok(())
    })
}

/// Jones polynomial as JSON. `cap` 0 selects the default state cap.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kc_jones_json(d: *const KcDiagram, cap: u64, out: *mut *mut c_char) -> KcStatus {
    guard(|| {
        let j = jones(diagram(d)?, cap_or_default(cap))?;
        emit(out, &j.to_json())
    })
}

/// Colored Jones polynomial as JSON.
///
/// # Safety
/// `colors` must point to `len` values; `d` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kc_colored_jones_json(
    d: *const KcDiagram,
    colors_ptr: *const u32,
    len: usize,
    cap: u64,
    out: *mut *mut c_char,
) -> KcStatus {
    guard(|| {
        let n = colors(colors_ptr, len)?;
        let j = colored_jones(diagram(d)?, &n, cap_or_default(cap))?;
        emit(out, &j.to_json())
    })
}

/// Khovanov homology as JSON: nonzero (i, j) groups and the graded Euler
/// characteristic.
///
/// # Safety
/// `d` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kc_khovanov_json(d: *const KcDiagram, cap: u64, out: *mut *mut c_char) -> KcStatus {
    guard(|| {
        let kc = KhovanovComplex::build(diagram(d)?, cap_or_default(cap))?;
        kc.check_d_squared()?;
        let h = homology(&kc)?;
        let rows: Vec<_> = h
            .iter()
            .map(|(&(i, j), g)| {
                let mut v = serde_json::to_value(g).expect("json");
                v["i"] = json!(i);
                v["j"] = json!(j);
                v
            })
            .collect();
        emit(out, &json!({ "homology": rows, "graded_euler": graded_euler(&kc).to_json() }))
    })
}

/// Bicomplex identity suite with the Euler cross-check. The report is written
/// even when an identity fails; the status is then `IdentityFailure`.
///
/// # Safety
/// `colors` must point to `len` values; `d` live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kc_bicomplex_verify_json(
    d: *const KcDiagram,
    colors_ptr: *const u32,
    len: usize,
    cap: u64,
    out: *mut *mut c_char,
) -> KcStatus {
    guard(|| {
        let d = diagram(d)?;
        let n = colors(colors_ptr, len)?;
        let cap = cap_or_default(cap);
        let opts = BicomplexOptions {
            cap,
            ..BicomplexOptions::default()
        };
        let b = build_bicomplex(d, &n, opts)?;
        let r = b.verify(Some(colored_jones(d, &n, cap)?));
        emit(
            out,
            &json!({
                "ok": r.all_ok(),
                "summary": r.summary_line(),
                "bigraded_euler": r.bigraded_euler.to_json(),
            }),
        )?;
        if r.all_ok() {
            Ok(())
        } else {
            Err(Fail(KcStatus::IdentityFailure, r.summary_line()))
        }
    })
}

/// # Safety
/// `s` must come from this library and not be freed twice. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn kc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
