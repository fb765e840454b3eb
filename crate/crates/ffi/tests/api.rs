use std::ffi::{CStr, CString};
use std::ptr;

use ksreduce_ffi::*;

fn text(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { ks_string_free(s) };
    out
}

fn last_error() -> String {
    let p = ks_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

fn parse(src: &str, chart: u32) -> *mut KsOperator {
    let src = CString::new(src).unwrap();
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { ks_operator_parse(src.as_ptr(), chart, &mut op) }, KsStatus::Ok);
    op
}

#[test]
fn projects_the_conformal_laplacian() {
    let op = parse("(1/(4*R^2))*d[y1]^2 + (1/(4*R^2))*d[y2]^2 + (1/(4*R^2))*d[y3]^2 + (1/(4*R^2))*d[y0]^2", KS_CHART_R4);
    let mut projectable = false;
    assert_eq!(unsafe { ks_operator_is_projectable(op, &mut projectable) }, KsStatus::Ok);
    assert!(projectable);
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ks_operator_project(op, &mut p) }, KsStatus::Ok);
    assert_eq!(text(unsafe { ks_operator_to_string(p) }), "d[x1]^2 + d[x2]^2 + d[x3]^2");
    let mut deg = 0;
    assert_eq!(unsafe { ks_operator_degree(p, &mut deg) }, KsStatus::Ok);
    assert_eq!(deg, 2);
    unsafe {
        ks_operator_free(p);
        ks_operator_free(op);
    }
}

#[test]
fn commutator_and_failures() {
    let a = parse("d[y0]", KS_CHART_R4);
    let b = parse("y0*d[y3] - y3*d[y0] + y1*d[y2] - y2*d[y1]", KS_CHART_R4);
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { ks_operator_commutator(a, b, &mut c) }, KsStatus::Ok);
    assert_eq!(text(unsafe { ks_operator_to_string(c) }), "d[y3]");

    let mut p = ptr::null_mut();
    assert_eq!(unsafe { ks_operator_project(a, &mut p) }, KsStatus::NotProjectable);
    assert!(p.is_null());
    assert!(last_error().contains("not projectable"));

    let x = parse("d[x1]", KS_CHART_R3);
    assert_eq!(unsafe { ks_operator_commutator(a, x, &mut c) }, KsStatus::ChartMismatch);
    unsafe {
        ks_operator_free(a);
        ks_operator_free(b);
        ks_operator_free(x);
    }
}

#[test]
fn coefficient_transport() {
    let src = CString::new("x1 + r").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { ks_coeff_parse(src.as_ptr(), KS_CHART_R3, &mut f) }, KsStatus::Ok);
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { ks_coeff_pullback(f, &mut g) }, KsStatus::Ok);
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { ks_coeff_descend(g, &mut h) }, KsStatus::Ok);
    assert_eq!(text(unsafe { ks_coeff_to_string(h) }), text(unsafe { ks_coeff_to_string(f) }));

    let src = CString::new("y0").unwrap();
    let mut y = ptr::null_mut();
    assert_eq!(unsafe { ks_coeff_parse(src.as_ptr(), KS_CHART_R4, &mut y) }, KsStatus::Ok);
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { ks_coeff_descend(y, &mut bad) }, KsStatus::NotFiberInvariant);
    unsafe {
        for c in [f, g, h, y] {
            ks_coeff_free(c);
        }
    }
}

#[test]
fn argument_errors() {
    let src = CString::new("d[q1]").unwrap();
    let mut op = ptr::null_mut();
    assert_eq!(unsafe { ks_operator_parse(src.as_ptr(), KS_CHART_R4, &mut op) }, KsStatus::Parse);
    assert_eq!(unsafe { ks_operator_parse(ptr::null(), KS_CHART_R4, &mut op) }, KsStatus::NullPointer);
    let src = CString::new("d[y1]").unwrap();
    assert_eq!(unsafe { ks_operator_parse(src.as_ptr(), 7, &mut op) }, KsStatus::InvalidArgument);
    assert_eq!(unsafe { ks_operator_parse(src.as_ptr(), KS_CHART_R4, ptr::null_mut()) }, KsStatus::NullPointer);
    let mut d = 0;
    assert_eq!(unsafe { ks_operator_degree(ptr::null(), &mut d) }, KsStatus::NullPointer);
    assert!(unsafe { ks_operator_to_string(ptr::null()) }.is_null());
    unsafe {
        ks_operator_free(ptr::null_mut());
        ks_string_free(ptr::null_mut());
    }
}

#[test]
fn spectrum_queries() {
    let (mut num, mut den) = (0, 0);
    assert_eq!(unsafe { ks_admissible_energy(1, 1, 2, &mut num, &mut den) }, KsStatus::Ok);
    assert_eq!((num, den), (-1, 8));
    assert_eq!(unsafe { ks_admissible_energy(1, 0, 2, &mut num, &mut den) }, KsStatus::InvalidArgument);
    let mut dim = 0;
    assert_eq!(unsafe { ks_kernel_dimension(2, 1, 1, &mut dim) }, KsStatus::Ok);
    assert_eq!(dim, 4);
    assert_eq!(unsafe { ks_kernel_dimension(2, -1, 1, &mut dim) }, KsStatus::InvalidArgument);
}

#[test]
fn header_lists_the_api() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/ksreduce.h")).unwrap();
    for name in ["ks_operator_parse", "ks_operator_project", "ks_coeff_descend", "ks_string_free", "KS_STATUS_OK"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
