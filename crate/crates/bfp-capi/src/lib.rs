//! C ABI for the bfp solver: opaque handles, status codes, copy-out buffers.
//!
//! A problem handle is parsed from the same key=value configuration text the
//! CLI consumes. Solves return report handles whose scalar fields and arrays
//! are read through accessor functions. All functions are safe against null
//! handles and report failures through `BfpStatus` plus a thread-local
//! message retrievable with `bfp_last_error_message`.

use bfp::harness::parse_config;
use bfp::solvers::{dense_reference_solve, nda_solve, source_iteration, SolveReport};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Status code returned by every fallible C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfpStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    SolveError = 4,
    BufferTooSmall = 5,
}

/// Iterative method selector for `bfp_solve`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfpMethod {
    Si = 0,
    Nda = 1,
}

/// Opaque parsed problem (configuration text plus defaults).
pub struct BfpProblem {
    config: bfp::harness::RunConfig,
}

/// Opaque solve report.
pub struct BfpReport {
    inner: SolveReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let cstring = CString::new(message).unwrap_or_else(|_| CString::new("error").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(cstring));
}

/// Message for the most recent failure on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn bfp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| match &*slot.borrow() {
        Some(msg) => msg.as_ptr(),
        None => ptr::null(),
    })
}

/// Parse a configuration and allocate a problem handle into `out_problem`.
/// The text uses the CLI's key=value format; harness-only keys (label,
/// output paths, emit flags) are accepted and ignored here.
///
/// # Safety
/// `config_text` must be a valid NUL-terminated C string and `out_problem`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfp_problem_parse(
    config_text: *const c_char,
    out_problem: *mut *mut BfpProblem,
) -> BfpStatus {
    if config_text.is_null() || out_problem.is_null() {
        set_error("null argument".to_string());
        return BfpStatus::NullArgument;
    }
    let text = match CStr::from_ptr(config_text).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("configuration text is not valid UTF-8".to_string());
            return BfpStatus::InvalidUtf8;
        }
    };
    match parse_config(text) {
        Ok(config) => {
            *out_problem = Box::into_raw(Box::new(BfpProblem { config }));
            BfpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            BfpStatus::ConfigError
        }
    }
}

/// Release a problem handle. Null is a no-op.
///
/// # Safety
/// `problem` must be a pointer returned by `bfp_problem_parse` (or null)
/// that has not already been freed.
#[no_mangle]
pub unsafe extern "C" fn bfp_problem_free(problem: *mut BfpProblem) {
    if !problem.is_null() {
        drop(Box::from_raw(problem));
    }
}

/// Number of spatial nodes (cells) of the problem, 0 on null.
///
/// # Safety
/// `problem` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bfp_problem_cells(problem: *const BfpProblem) -> usize {
    match problem.as_ref() {
        Some(p) => p.config.problem.cells,
        None => 0,
    }
}

/// Run the selected iterative method and allocate a report handle.
///
/// # Safety
/// `problem` must be a live handle and `out_report` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bfp_solve(
    problem: *const BfpProblem,
    method: BfpMethod,
    out_report: *mut *mut BfpReport,
) -> BfpStatus {
    let Some(p) = problem.as_ref() else {
        set_error("null problem handle".to_string());
        return BfpStatus::NullArgument;
    };
    if out_report.is_null() {
        set_error("null output pointer".to_string());
        return BfpStatus::NullArgument;
    }
    let spec = p.config.problem.clone();
    let result = catch_unwind(AssertUnwindSafe(|| match method {
        BfpMethod::Si => source_iteration(&spec),
        BfpMethod::Nda => nda_solve(&spec),
    }));
    match result {
        Ok(Ok(report)) => {
            *out_report = Box::into_raw(Box::new(BfpReport { inner: report }));
            BfpStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            BfpStatus::SolveError
        }
        Err(_) => {
            set_error("solver panicked".to_string());
            BfpStatus::SolveError
        }
    }
}

/// Direct dense reference solve; copies the per-node scalar flux into
/// `buffer` (length must be at least the cell count).
///
/// # Safety
/// `problem` must be a live handle; `buffer` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bfp_oracle_flux(
    problem: *const BfpProblem,
    buffer: *mut f64,
    len: usize,
) -> BfpStatus {
    let Some(p) = problem.as_ref() else {
        set_error("null problem handle".to_string());
        return BfpStatus::NullArgument;
    };
    if buffer.is_null() {
        set_error("null buffer".to_string());
        return BfpStatus::NullArgument;
    }
    if len < p.config.problem.cells {
        set_error(format!("buffer holds {len}, need {}", p.config.problem.cells));
        return BfpStatus::BufferTooSmall;
    }
    match dense_reference_solve(&p.config.problem) {
        Ok(phi) => {
            ptr::copy_nonoverlapping(phi.as_ptr(), buffer, phi.len());
            BfpStatus::Ok
        }
        Err(e) => {
            set_error(e.to_string());
            BfpStatus::SolveError
        }
    }
}

/// Release a report handle. Null is a no-op.
///
/// # Safety
/// `report` must be a pointer returned by `bfp_solve` (or null) that has
/// not already been freed.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_free(report: *mut BfpReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// Iteration count at termination (0 on null).
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_iterations(report: *const BfpReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.iterations)
}

/// Whether the run met its tolerance.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_converged(report: *const BfpReport) -> bool {
    report.as_ref().is_some_and(|r| r.inner.converged)
}

/// Wall time of the iteration loop in seconds.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_wall_seconds(report: *const BfpReport) -> f64 {
    report.as_ref().map_or(0.0, |r| r.inner.wall_seconds)
}

/// Number of per-node flux values.
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_num_nodes(report: *const BfpReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.phi0.len())
}

/// Number of entries in the error history (= iterations).
///
/// # Safety
/// `report` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_history_len(report: *const BfpReport) -> usize {
    report.as_ref().map_or(0, |r| r.inner.error_history.len())
}

unsafe fn copy_slice(src: &[f64], buffer: *mut f64, len: usize) -> BfpStatus {
    if buffer.is_null() {
        set_error("null buffer".to_string());
        return BfpStatus::NullArgument;
    }
    if len < src.len() {
        set_error(format!("buffer holds {len}, need {}", src.len()));
        return BfpStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buffer, src.len());
    BfpStatus::Ok
}

/// Copy the converged scalar flux (one value per node) into `buffer`.
///
/// # Safety
/// `report` must be a live handle; `buffer` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_copy_flux(
    report: *const BfpReport,
    buffer: *mut f64,
    len: usize,
) -> BfpStatus {
    match report.as_ref() {
        Some(r) => copy_slice(&r.inner.phi0, buffer, len),
        None => {
            set_error("null report handle".to_string());
            BfpStatus::NullArgument
        }
    }
}

/// Copy the edge currents (nodes + 1 values) into `buffer`.
///
/// # Safety
/// `report` must be a live handle; `buffer` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_copy_edge_currents(
    report: *const BfpReport,
    buffer: *mut f64,
    len: usize,
) -> BfpStatus {
    match report.as_ref() {
        Some(r) => copy_slice(&r.inner.edge_currents, buffer, len),
        None => {
            set_error("null report handle".to_string());
            BfpStatus::NullArgument
        }
    }
}

/// Copy the per-iteration error history into `buffer`.
///
/// # Safety
/// `report` must be a live handle; `buffer` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bfp_report_copy_history(
    report: *const BfpReport,
    buffer: *mut f64,
    len: usize,
) -> BfpStatus {
    match report.as_ref() {
        Some(r) => copy_slice(&r.inner.error_history, buffer, len),
        None => {
            set_error("null report handle".to_string());
            BfpStatus::NullArgument
        }
    }
}
