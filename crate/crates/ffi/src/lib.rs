//! C ABI over the dockselect core.
//!
//! Conventions:
//!
//! * Fallible calls return a [`DselStatus`]; `DSEL_STATUS_OK` is zero.
//! * On failure a thread-local message is stored; fetch it with
//!   [`dsel_last_error_message`] and release it with [`dsel_string_free`].
//! * `DselModel` is an opaque handle created by [`dsel_model_load`] and
//!   released by [`dsel_model_free`]. Handles are immutable after load and
//!   safe to share across threads for prediction.
//! * All strings are NUL-terminated UTF-8. Strings returned by this library
//!   are heap-allocated and owned by the caller (free via
//!   [`dsel_string_free`]); `dsel_version` is the one exception, returning a
//!   static string.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::path::Path;

use libc::c_char;

use dockselect::error::Error;
use dockselect::model::checkpoint::{load_checkpoint, Checkpoint};
use dockselect::scoring::{composite_score, rmsd_score, PerformanceRecord, ScoreConfig, ScoreMode};

/// Operation outcome; zero means success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DselStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidInput = 2,
    InvalidConfig = 3,
    ShapeMismatch = 4,
    SchemaViolation = 5,
    ParseError = 6,
    VersionMismatch = 7,
    IoError = 8,
    InternalError = 9,
}

/// How the geometric and validity scores combine.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DselScoreMode {
    Additive = 0,
    Multiplicative = 1,
}

/// Opaque trained-model handle.
pub struct DselModel {
    checkpoint: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let cstring = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

fn clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

fn fail(e: &Error) -> DselStatus {
    set_last_error(e.to_string());
    match e {
        Error::InvalidInput(_) => DselStatus::InvalidInput,
        Error::InvalidConfig(_) => DselStatus::InvalidConfig,
        Error::ShapeMismatch(_) => DselStatus::ShapeMismatch,
        Error::Schema(_) => DselStatus::SchemaViolation,
        Error::Parse { .. } => DselStatus::ParseError,
        Error::Version { .. } => DselStatus::VersionMismatch,
        Error::Io(_) => DselStatus::IoError,
        Error::Internal(_) => DselStatus::InternalError,
    }
}

fn fail_null(what: &str) -> DselStatus {
    set_last_error(format!("{what} must not be NULL"));
    DselStatus::NullArgument
}

/// Library version as a static NUL-terminated string. Do not free.
#[no_mangle]
pub extern "C" fn dsel_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Returns the calling thread's last error message as a newly allocated
/// string (caller frees via `dsel_string_free`), or NULL when no error has
/// occurred since the last successful call.
#[no_mangle]
pub extern "C" fn dsel_last_error_message() -> *mut c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.clone().into_raw(),
        None => std::ptr::null_mut(),
    })
}

/// Frees a string returned by this library.
///
/// # Safety
/// `s` must have been returned by a dockselect function documented as
/// caller-owned, and must not be used afterwards. NULL is ignored.
#[no_mangle]
pub unsafe extern "C" fn dsel_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Exponential RMSD score clipped at `tolerance_m`; writes into `out`.
///
/// # Safety
/// `out` must point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn dsel_rmsd_score(rmsd: f64, tolerance_m: f64, out: *mut f64) -> DselStatus {
    if out.is_null() {
        return fail_null("out");
    }
    match rmsd_score(rmsd, tolerance_m) {
        Ok(score) => {
            *out = score;
            clear_last_error();
            DselStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Composite score of a single docking outcome. `has_pose == false` marks a
/// docking failure (RMSD ignored, score 0).
///
/// # Safety
/// `out` must point to writable memory for one `double`.
#[no_mangle]
pub unsafe extern "C" fn dsel_composite_score(
    rmsd: f64,
    has_pose: bool,
    pb_valid: bool,
    mode: DselScoreMode,
    tolerance_m: f64,
    alpha: f64,
    out: *mut f64,
) -> DselStatus {
    if out.is_null() {
        return fail_null("out");
    }
    let record = PerformanceRecord {
        instance_id: String::new(),
        algorithm_id: String::new(),
        rmsd: if has_pose { Some(rmsd) } else { None },
        pb_valid,
    };
    let cfg = ScoreConfig {
        mode: match mode {
            DselScoreMode::Additive => ScoreMode::Additive,
            DselScoreMode::Multiplicative => ScoreMode::Multiplicative,
        },
        tolerance_m,
        alpha,
    };
    match composite_score(&record, &cfg) {
        Ok(score) => {
            *out = score;
            clear_last_error();
            DselStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Loads a model checkpoint. Returns NULL on failure (see
/// `dsel_last_error_message`); free the handle with `dsel_model_free`.
///
/// # Safety
/// `path` must be a NUL-terminated string, valid for the duration of the
/// call.
#[no_mangle]
pub unsafe extern "C" fn dsel_model_load(path: *const c_char) -> *mut DselModel {
    if path.is_null() {
        fail_null("path");
        return std::ptr::null_mut();
    }
    let path = match CStr::from_ptr(path).to_str() {
        Ok(s) => s,
        Err(_) => {
            set_last_error("path is not valid UTF-8".into());
            return std::ptr::null_mut();
        }
    };
    match load_checkpoint(Path::new(path)) {
        Ok(checkpoint) => {
            clear_last_error();
            Box::into_raw(Box::new(DselModel { checkpoint }))
        }
        Err(e) => {
            fail(&e);
            std::ptr::null_mut()
        }
    }
}

/// Releases a model handle. NULL is ignored.
///
/// # Safety
/// `model` must come from `dsel_model_load` and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn dsel_model_free(model: *mut DselModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Feature dimensionality the model expects, or 0 for NULL.
///
/// # Safety
/// `model` must be a live handle from `dsel_model_load` or NULL.
#[no_mangle]
pub unsafe extern "C" fn dsel_model_input_dim(model: *const DselModel) -> usize {
    match model.as_ref() {
        Some(m) => m.checkpoint.params.arch().input_dim,
        None => 0,
    }
}

/// Number of portfolio algorithms the model scores, or 0 for NULL.
///
/// # Safety
/// `model` must be a live handle from `dsel_model_load` or NULL.
#[no_mangle]
pub unsafe extern "C" fn dsel_model_output_dim(model: *const DselModel) -> usize {
    match model.as_ref() {
        Some(m) => m.checkpoint.portfolio.len(),
        None => 0,
    }
}

/// Name of the algorithm behind output column `index`, as a caller-owned
/// string; NULL when the model is NULL or the index is out of range.
///
/// # Safety
/// `model` must be a live handle from `dsel_model_load` or NULL.
#[no_mangle]
pub unsafe extern "C" fn dsel_model_algorithm_name(
    model: *const DselModel,
    index: usize,
) -> *mut c_char {
    let Some(m) = model.as_ref() else {
        fail_null("model");
        return std::ptr::null_mut();
    };
    match m.checkpoint.portfolio.get(index) {
        Some(name) => match CString::new(name.as_str()) {
            Ok(s) => {
                clear_last_error();
                s.into_raw()
            }
            Err(_) => {
                set_last_error("algorithm name contained NUL".into());
                std::ptr::null_mut()
            }
        },
        None => {
            set_last_error(format!(
                "algorithm index {index} out of range ({} algorithms)",
                m.checkpoint.portfolio.len()
            ));
            std::ptr::null_mut()
        }
    }
}

/// Predicted per-algorithm scores for one feature vector. The stored
/// feature scaler, if any, is applied first. `out_scores` receives exactly
/// `dsel_model_output_dim` values, so `out_len` must equal it.
///
/// # Safety
/// `features` must point to `features_len` readable doubles and
/// `out_scores` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn dsel_model_predict(
    model: *const DselModel,
    features: *const f64,
    features_len: usize,
    out_scores: *mut f64,
    out_len: usize,
) -> DselStatus {
    let Some(m) = model.as_ref() else {
        return fail_null("model");
    };
    if features.is_null() {
        return fail_null("features");
    }
    if out_scores.is_null() {
        return fail_null("out_scores");
    }
    let expected = m.checkpoint.portfolio.len();
    if out_len != expected {
        set_last_error(format!(
            "out_len is {out_len}, model produces {expected} scores"
        ));
        return DselStatus::ShapeMismatch;
    }
    let input = std::slice::from_raw_parts(features, features_len);
    match m.checkpoint.predict(input) {
        Ok(scores) => {
            let out = std::slice::from_raw_parts_mut(out_scores, out_len);
            out.copy_from_slice(&scores);
            clear_last_error();
            DselStatus::Ok
        }
        Err(e) => fail(&e),
    }
}

/// Argmax algorithm selection (ties resolve to the lowest index); writes the
/// selected column into `out_index`.
///
/// # Safety
/// `features` must point to `features_len` readable doubles and `out_index`
/// to one writable `size_t`.
#[no_mangle]
pub unsafe extern "C" fn dsel_model_select(
    model: *const DselModel,
    features: *const f64,
    features_len: usize,
    out_index: *mut usize,
) -> DselStatus {
    let Some(m) = model.as_ref() else {
        return fail_null("model");
    };
    if features.is_null() {
        return fail_null("features");
    }
    if out_index.is_null() {
        return fail_null("out_index");
    }
    let input = std::slice::from_raw_parts(features, features_len);
    match m.checkpoint.select(input) {
        Ok(index) => {
            *out_index = index;
            clear_last_error();
            DselStatus::Ok
        }
        Err(e) => fail(&e),
    }
}
