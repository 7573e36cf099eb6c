//! C ABI for the scorer side of catkit, so other languages can load trained
//! model files and score category-document pairs.
//!
//! Conventions: every fallible call returns a [`CatkitStatus`]; out-values
//! are written only on `Ok`. `catkit_last_error_message` returns a
//! thread-local, NUL-terminated description of the most recent failure on
//! the calling thread, valid until the next failing call on that thread.
//! Handles are opaque; free them with `catkit_scorer_free` exactly once.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::ptr;

use catkit::error::Error;
use catkit::scorer::{load_scorer, Scorer};

/// Opaque handle over a loaded scorer model.
pub struct CatkitScorer(Box<dyn Scorer>);

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatkitStatus {
    CatkitOk = 0,
    CatkitErrNullArgument = 1,
    CatkitErrInvalidUtf8 = 2,
    CatkitErrIo = 3,
    CatkitErrFormat = 4,
    CatkitErrVersionMismatch = 5,
    CatkitErrCorrupt = 6,
    CatkitErrInternal = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_for(err: &Error) -> CatkitStatus {
    match err {
        Error::Io { .. } => CatkitStatus::CatkitErrIo,
        Error::VersionMismatch { .. } => CatkitStatus::CatkitErrVersionMismatch,
        Error::Corrupt { .. } => CatkitStatus::CatkitErrCorrupt,
        Error::ModelFormat(_) => CatkitStatus::CatkitErrFormat,
        _ => CatkitStatus::CatkitErrInternal,
    }
}

fn fail(err: &Error) -> CatkitStatus {
    set_error(&err.to_string());
    status_for(err)
}

unsafe fn cstr_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, CatkitStatus> {
    if ptr.is_null() {
        set_error(&format!("{name} is NULL"));
        return Err(CatkitStatus::CatkitErrNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{name} is not valid UTF-8"));
        CatkitStatus::CatkitErrInvalidUtf8
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn catkit_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Most recent error message on this thread (empty string when none).
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn catkit_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Loads a scorer model file (linear model or concept index, dispatched by
/// file magic). On success writes a handle to `out_scorer`.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_scorer` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn catkit_scorer_open(
    path: *const c_char,
    out_scorer: *mut *mut CatkitScorer,
) -> CatkitStatus {
    if out_scorer.is_null() {
        set_error("out_scorer is NULL");
        return CatkitStatus::CatkitErrNullArgument;
    }
    let path = match cstr_arg(path, "path") {
        Ok(p) => p,
        Err(status) => return status,
    };
    match load_scorer(Path::new(path)) {
        Ok(scorer) => {
            *out_scorer = Box::into_raw(Box::new(CatkitScorer(scorer)));
            CatkitStatus::CatkitOk
        }
        Err(err) => fail(&err),
    }
}

/// Model kind of a handle: "linear" or "esa" (static string).
///
/// # Safety
/// `scorer` must be a live handle from `catkit_scorer_open`.
#[no_mangle]
pub unsafe extern "C" fn catkit_scorer_kind(scorer: *const CatkitScorer) -> *const c_char {
    if scorer.is_null() {
        return ptr::null();
    }
    match (*scorer).0.kind() {
        "linear" => c"linear".as_ptr(),
        "esa" => c"esa".as_ptr(),
        _ => c"unknown".as_ptr(),
    }
}

/// Scores one category-document pair; higher means the category describes
/// the document better. Writes the score to `out_score`.
///
/// # Safety
/// `scorer` must be a live handle; strings NUL-terminated; `out_score` valid.
#[no_mangle]
pub unsafe extern "C" fn catkit_scorer_score(
    scorer: *const CatkitScorer,
    category: *const c_char,
    document: *const c_char,
    out_score: *mut f64,
) -> CatkitStatus {
    if scorer.is_null() || out_score.is_null() {
        set_error("scorer or out_score is NULL");
        return CatkitStatus::CatkitErrNullArgument;
    }
    let category = match cstr_arg(category, "category") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let document = match cstr_arg(document, "document") {
        Ok(s) => s,
        Err(status) => return status,
    };
    *out_score = (*scorer).0.score(category, document);
    CatkitStatus::CatkitOk
}

/// Scores one category against `count` documents, writing `count` scores to
/// `out_scores`.
///
/// # Safety
/// `documents` must point at `count` NUL-terminated strings and `out_scores`
/// at `count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn catkit_scorer_score_batch(
    scorer: *const CatkitScorer,
    category: *const c_char,
    documents: *const *const c_char,
    count: usize,
    out_scores: *mut f64,
) -> CatkitStatus {
    if scorer.is_null() || documents.is_null() || out_scores.is_null() {
        set_error("scorer, documents, or out_scores is NULL");
        return CatkitStatus::CatkitErrNullArgument;
    }
    let category = match cstr_arg(category, "category") {
        Ok(s) => s,
        Err(status) => return status,
    };
    for i in 0..count {
        let document = match cstr_arg(*documents.add(i), "documents[i]") {
            Ok(s) => s,
            Err(status) => return status,
        };
        *out_scores.add(i) = (*scorer).0.score(category, document);
    }
    CatkitStatus::CatkitOk
}

/// Releases a handle. Passing NULL is a no-op.
///
/// # Safety
/// `scorer` must come from `catkit_scorer_open` and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn catkit_scorer_free(scorer: *mut CatkitScorer) {
    if !scorer.is_null() {
        drop(Box::from_raw(scorer));
    }
}
