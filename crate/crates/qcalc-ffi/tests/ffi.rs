//! Drives the C entry points the way a foreign caller would: through raw
//! pointers and the documented ownership rules.

use qcalc_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn take_report(status: QcalcStatus, handle: *mut QcalcReport) -> String {
    assert_eq!(status, QcalcStatus::Ok);
    assert!(!handle.is_null());
    assert_eq!(qcalc_report_passed(handle), 1);
    let json = qcalc_report_json(handle);
    assert!(!json.is_null());
    let text = unsafe { CStr::from_ptr(json) }.to_str().unwrap().to_string();
    unsafe {
        qcalc_string_free(json);
        qcalc_report_free(handle);
    }
    text
}

#[test]
fn nilpotency_round_trip() {
    let mut handle: *mut QcalcReport = ptr::null_mut();
    let status = qcalc_verify_nilpotency(3, 2, 5, 1, &mut handle);
    let json = take_report(status, handle);
    assert!(json.contains("\"command\": \"verify nilpotency\""));
    assert_eq!(json.matches("\"status\": \"pass\"").count(), 5);
}

#[test]
fn conditions_and_clifford() {
    let mut handle: *mut QcalcReport = ptr::null_mut();
    let status = qcalc_verify_conditions(3, 2, &mut handle);
    take_report(status, handle);

    let mut handle: *mut QcalcReport = ptr::null_mut();
    let status = qcalc_clifford_verify(2, 2, &mut handle);
    take_report(status, handle);
}

#[test]
fn dimension_formula() {
    assert_eq!(qcalc_module_dimension(1), 4);
    assert_eq!(qcalc_module_dimension(2), 14);
    assert_eq!(qcalc_module_dimension(6), 154);
}

#[test]
fn curve_length_from_json() {
    let cfg = CString::new(
        r#"{
            "metric": [["1", "0"], ["0", "1"]],
            "curve": ["cos(t)", "sin(t)"],
            "from": 0.0, "to": 6.283185307179586, "tol": 1e-10
        }"#,
    )
    .unwrap();
    let mut length = 0.0f64;
    let status = qcalc_curve_length(cfg.as_ptr(), &mut length);
    assert_eq!(status, QcalcStatus::Ok);
    assert!((length - 2.0 * std::f64::consts::PI).abs() < 1e-8);
}

#[test]
fn error_paths() {
    // bad parameters
    let mut handle: *mut QcalcReport = ptr::null_mut();
    assert_eq!(
        qcalc_verify_nilpotency(1, 2, 5, 0, &mut handle),
        QcalcStatus::InvalidArg
    );
    assert!(handle.is_null());
    assert_eq!(
        qcalc_verify_nilpotency(3, 0, 5, 0, &mut handle),
        QcalcStatus::InvalidArg
    );
    assert_eq!(qcalc_clifford_verify(0, 2, &mut handle), QcalcStatus::InvalidArg);

    // null out pointer
    assert_eq!(
        qcalc_verify_nilpotency(3, 2, 5, 0, ptr::null_mut()),
        QcalcStatus::InvalidArg
    );

    // unparsable config
    let bad = CString::new("definitely not json").unwrap();
    let mut length = 0.0f64;
    assert_eq!(qcalc_curve_length(bad.as_ptr(), &mut length), QcalcStatus::ParseError);
    assert_eq!(
        qcalc_curve_length(ptr::null(), &mut length),
        QcalcStatus::InvalidArg
    );

    // null handles are tolerated
    assert_eq!(qcalc_report_passed(ptr::null()), -1);
    assert!(qcalc_report_json(ptr::null()).is_null());
    unsafe {
        qcalc_report_free(ptr::null_mut());
        qcalc_string_free(ptr::null_mut());
    }
}

#[test]
fn version_string() {
    let v = qcalc_version();
    assert!(!v.is_null());
    let text = unsafe { CStr::from_ptr(v) }.to_str().unwrap();
    assert!(text.split('.').count() >= 2);
    unsafe { qcalc_string_free(v) };
}
