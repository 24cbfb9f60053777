//! C interface to the eoqa engine.
//!
//! An engine is loaded once with [`eoqa_engine_load`] and then answers
//! questions from any thread. Responses are JSON strings owned by the caller
//! and released with [`eoqa_string_free`].

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use eoqa::app::{AskError, AskOptions, Engine};

/// Opaque engine handle.
pub struct EoqaEngine {
    inner: Engine,
}

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EoqaStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    LoadFailed = 3,
    EmptyQuestion = 4,
    AskFailed = 5,
    Panic = 6,
}

/// Run the generated query and include answers.
pub const EOQA_EXECUTE: u32 = 1;
/// Include the parse, annotations and generation notes.
pub const EOQA_TRACE: u32 = 2;

fn text<'a>(p: *const c_char) -> Result<&'a str, EoqaStatus> {
    if p.is_null() {
        return Err(EoqaStatus::NullArgument);
    }
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| EoqaStatus::InvalidUtf8)
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

fn error_json(message: &str) -> *mut c_char {
    into_c(serde_json::json!({ "error": message }).to_string())
}

fn guarded(f: impl FnOnce() -> EoqaStatus) -> EoqaStatus {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(EoqaStatus::Panic)
}

/// Loads every `.nt` file in `kg_dir`. `materialized` may be NULL, in which
/// case spatial relations are computed. On success `*out` receives a handle
/// to release with [`eoqa_engine_free`]; on failure it is set to NULL.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn eoqa_engine_load(
    kg_dir: *const c_char,
    materialized: *const c_char,
    out: *mut *mut EoqaEngine,
) -> EoqaStatus {
    if out.is_null() {
        return EoqaStatus::NullArgument;
    }
    *out = ptr::null_mut();
    guarded(|| {
        let dir = match text(kg_dir) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let mat = if materialized.is_null() {
            None
        } else {
            match text(materialized) {
                Ok(m) => Some(Path::new(m)),
                Err(s) => return s,
            }
        };
        match Engine::load(Path::new(dir), mat) {
            Ok(engine) => {
                *out = Box::into_raw(Box::new(EoqaEngine { inner: engine }));
                EoqaStatus::Ok
            }
            Err(_) => EoqaStatus::LoadFailed,
        }
    })
}

/// Releases an engine. NULL is ignored.
///
/// # Safety
/// `engine` must come from [`eoqa_engine_load`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn eoqa_engine_free(engine: *mut EoqaEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Answers one question. `flags` combines [`EOQA_EXECUTE`] and
/// [`EOQA_TRACE`]. `*out_json` receives the response, or `{"error": ...}`
/// when the status is not `Ok`; free it with [`eoqa_string_free`].
///
/// # Safety
/// `engine` must be a live handle, `question` NUL-terminated and `out_json`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn eoqa_ask(
    engine: *const EoqaEngine,
    question: *const c_char,
    flags: u32,
    out_json: *mut *mut c_char,
) -> EoqaStatus {
    if out_json.is_null() {
        return EoqaStatus::NullArgument;
    }
    *out_json = ptr::null_mut();
    if engine.is_null() {
        return EoqaStatus::NullArgument;
    }
    let status = guarded(|| {
        let q = match text(question) {
            Ok(q) => q,
            Err(s) => return s,
        };
        let opts = AskOptions {
            execute: flags & EOQA_EXECUTE != 0,
            trace: flags & EOQA_TRACE != 0,
        };
        match (*engine).inner.ask(q, opts) {
            Ok(r) => {
                *out_json = into_c(serde_json::to_string(&r).expect("responses serialize"));
                EoqaStatus::Ok
            }
            Err(e) => {
                *out_json = error_json(&e.to_string());
                match e {
                    AskError::EmptyQuestion => EoqaStatus::EmptyQuestion,
                    _ => EoqaStatus::AskFailed,
                }
            }
        }
    });
    if (*out_json).is_null() && status != EoqaStatus::Ok {
        *out_json = error_json(message(status).to_str().expect("ASCII messages"));
    }
    status
}

/// Number of triples in the loaded knowledge graph, 0 for NULL.
///
/// # Safety
/// `engine` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eoqa_engine_triple_count(engine: *const EoqaEngine) -> usize {
    if engine.is_null() {
        0
    } else {
        (*engine).inner.kg().store.len()
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn eoqa_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

fn message(status: EoqaStatus) -> &'static CStr {
    match status {
        EoqaStatus::Ok => c"ok",
        EoqaStatus::NullArgument => c"null argument",
        EoqaStatus::InvalidUtf8 => c"argument is not valid UTF-8",
        EoqaStatus::LoadFailed => c"knowledge graph could not be loaded",
        EoqaStatus::EmptyQuestion => c"question is empty",
        EoqaStatus::AskFailed => c"question could not be answered",
        EoqaStatus::Panic => c"internal error",
    }
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn eoqa_status_message(status: EoqaStatus) -> *const c_char {
    message(status).as_ptr()
}

/// Library version, e.g. `0.1.0`.
#[no_mangle]
pub extern "C" fn eoqa_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
