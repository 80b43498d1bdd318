//! C ABI over the verification engine. Reports are returned as opaque
//! handles; callers read them as JSON, query the aggregate pass flag, and
//! free them with [`qcalc_report_free`]. Every entry point catches panics
//! and maps them to [`QcalcStatus::Panic`] instead of unwinding across the
//! boundary.

use qcalc::clifford::verify_nilpotency_and_anticommutators;
use qcalc::config::{from_str, LengthConfig};
use qcalc::dim1::curve_length;
use qcalc::forms::module_dimension;
use qcalc::nilpotency::{verify_dn_zero, verify_l_conditions};
use qcalc::report::RunReport;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Result of every fallible call across the boundary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QcalcStatus {
    /// The operation ran and every check passed.
    Ok = 0,
    /// The operation ran but at least one check failed; the report is
    /// still produced.
    CheckFailed = 1,
    /// A parameter was out of range or a required pointer was null.
    InvalidArg = 2,
    /// A config string could not be parsed.
    ParseError = 3,
    /// The engine panicked; no output was produced.
    Panic = 4,
}

/// Opaque verification report.
pub struct QcalcReport {
    inner: RunReport,
}

fn emit(out: *mut *mut QcalcReport, report: RunReport) -> QcalcStatus {
    let status =
        if report.all_passed() { QcalcStatus::Ok } else { QcalcStatus::CheckFailed };
    unsafe {
        *out = Box::into_raw(Box::new(QcalcReport { inner: report }));
    }
    status
}

fn guarded(out: *mut *mut QcalcReport, body: impl FnOnce() -> QcalcStatus) -> QcalcStatus {
    if out.is_null() {
        return QcalcStatus::InvalidArg;
    }
    unsafe {
        *out = std::ptr::null_mut();
    }
    catch_unwind(AssertUnwindSafe(body)).unwrap_or(QcalcStatus::Panic)
}

/// Verify d^N f = 0 for `trials` seeded random polynomials in `n_vars`
/// variables. `*out` receives a report handle on success.
#[no_mangle]
pub extern "C" fn qcalc_verify_nilpotency(
    n_order: u32,
    n_vars: u32,
    trials: u32,
    seed: u64,
    out: *mut *mut QcalcReport,
) -> QcalcStatus {
    guarded(out, || {
        if n_order < 2 || n_vars == 0 || n_vars > 16 {
            return QcalcStatus::InvalidArg;
        }
        let mut report = RunReport::new("verify nilpotency");
        report.checks = verify_dn_zero(n_order, n_vars as usize, trials, seed);
        emit(out, report)
    })
}

/// Verify that every homogeneous condition polynomial of the order-N
/// algebra reduces to zero under the cyclic relations.
#[no_mangle]
pub extern "C" fn qcalc_verify_conditions(
    n_order: u32,
    n_vars: u32,
    out: *mut *mut QcalcReport,
) -> QcalcStatus {
    guarded(out, || {
        if n_order < 2 || n_vars == 0 || n_vars > 8 {
            return QcalcStatus::InvalidArg;
        }
        let mut report = RunReport::new("verify conditions");
        match verify_l_conditions(n_order, n_vars as usize) {
            Ok(checks) => {
                report.checks = checks;
                emit(out, report)
            }
            Err(_) => QcalcStatus::InvalidArg,
        }
    })
}

/// Basis dimension of the order-3 differential module over `n_vars`
/// variables; pure formula, never fails.
#[no_mangle]
pub extern "C" fn qcalc_module_dimension(n_vars: u64) -> u64 {
    catch_unwind(|| module_dimension(n_vars)).unwrap_or(0)
}

/// Run the Clifford suite (generator relations, matrix representation,
/// nilpotency of the q-differentials, operator anticommutators) for
/// C_{p,N}.
#[no_mangle]
pub extern "C" fn qcalc_clifford_verify(
    p: u32,
    n_order: u32,
    out: *mut *mut QcalcReport,
) -> QcalcStatus {
    guarded(out, || {
        if p == 0 || p > 6 || n_order < 2 || n_order > 6 {
            return QcalcStatus::InvalidArg;
        }
        let mut report = RunReport::new("clifford verify");
        match verify_nilpotency_and_anticommutators(p as usize, n_order) {
            Ok(checks) => {
                report.checks = checks;
                emit(out, report)
            }
            Err(_) => QcalcStatus::InvalidArg,
        }
    })
}

/// Arclength of a curve in a polynomial metric. `config_json` is the JSON
/// form of the length config (metric, curve, from, to, optional tol); the
/// result lands in `*out_length`.
#[no_mangle]
pub extern "C" fn qcalc_curve_length(
    config_json: *const c_char,
    out_length: *mut f64,
) -> QcalcStatus {
    if config_json.is_null() || out_length.is_null() {
        return QcalcStatus::InvalidArg;
    }
    catch_unwind(AssertUnwindSafe(|| {
        let text = match unsafe { CStr::from_ptr(config_json) }.to_str() {
            Ok(t) => t,
            Err(_) => return QcalcStatus::InvalidArg,
        };
        let cfg: LengthConfig = match from_str(text, "config.json") {
            Ok(c) => c,
            Err(_) => return QcalcStatus::ParseError,
        };
        let (metric, curve) = match (cfg.metric_polys(), cfg.curve_exprs()) {
            (Ok(m), Ok(c)) => (m, c),
            _ => return QcalcStatus::ParseError,
        };
        match curve_length(&metric, &curve, cfg.from, cfg.to, cfg.tol) {
            Ok(result) => {
                unsafe {
                    *out_length = result.length;
                }
                QcalcStatus::Ok
            }
            Err(_) => QcalcStatus::InvalidArg,
        }
    }))
    .unwrap_or(QcalcStatus::Panic)
}

/// JSON rendering of a report; free with [`qcalc_string_free`]. Null in,
/// null out.
#[no_mangle]
pub extern "C" fn qcalc_report_json(report: *const QcalcReport) -> *mut c_char {
    if report.is_null() {
        return std::ptr::null_mut();
    }
    catch_unwind(AssertUnwindSafe(|| {
        let json = unsafe { &*report }.inner.to_json();
        CString::new(json).map(CString::into_raw).unwrap_or(std::ptr::null_mut())
    }))
    .unwrap_or(std::ptr::null_mut())
}

/// 1 if every check in the report passed, 0 if any failed, -1 on null.
#[no_mangle]
pub extern "C" fn qcalc_report_passed(report: *const QcalcReport) -> c_int {
    if report.is_null() {
        return -1;
    }
    let passed = catch_unwind(AssertUnwindSafe(|| unsafe { &*report }.inner.all_passed()));
    match passed {
        Ok(true) => 1,
        Ok(false) => 0,
        Err(_) => -1,
    }
}

/// Release a report handle. Null is ignored.
///
/// # Safety
/// `report` must have been produced by one of the verify functions and not
/// freed before.
#[no_mangle]
pub unsafe extern "C" fn qcalc_report_free(report: *mut QcalcReport) {
    if report.is_null() {
        return;
    }
    drop(Box::from_raw(report));
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must have been returned by [`qcalc_report_json`] or
/// [`qcalc_version`] and not freed before.
#[no_mangle]
pub unsafe extern "C" fn qcalc_string_free(s: *mut c_char) {
    if s.is_null() {
        return;
    }
    drop(CString::from_raw(s));
}

/// Library version as a heap string; free with [`qcalc_string_free`].
#[no_mangle]
pub extern "C" fn qcalc_version() -> *mut c_char {
    CString::new(env!("CARGO_PKG_VERSION"))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}
