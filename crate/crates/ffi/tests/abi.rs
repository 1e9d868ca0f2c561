use std::ffi::CStr;
use std::process::Command;
use std::ptr;

use posim_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe { posim_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn cauchy_handle_round_trip() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { posim_contour_cauchy(0.0, &mut h) }, PosimStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { posim_contour_eval(h, 1.0, &mut v) }, PosimStatus::Ok);
    assert!((v - 0.5).abs() < 1e-12);
    let mut p = 0.0;
    assert_eq!(unsafe { posim_contour_possibility(h, 1.0, f64::INFINITY, &mut p) }, PosimStatus::Ok);
    assert!((p - 0.5).abs() < 1e-9);
    let mut n = 0.0;
    assert_eq!(unsafe { posim_contour_necessity(h, -1.0, 1.0, &mut n) }, PosimStatus::Ok);
    assert!((n - 0.5).abs() < 1e-9);

    let mut count = 0usize;
    let status = unsafe { posim_contour_region(h, 0.05, ptr::null_mut(), 0, &mut count) };
    assert_eq!(status, PosimStatus::BufferTooSmall);
    assert_eq!(count, 1);
    let mut bounds = [0.0; 2];
    assert_eq!(unsafe { posim_contour_region(h, 0.05, bounds.as_mut_ptr(), 1, &mut count) }, PosimStatus::Ok);
    // t with one degree of freedom, 97.5% quantile
    assert!((bounds[1] - 12.706204736174698).abs() < 1e-2 && (bounds[0] + bounds[1]).abs() < 1e-9);
    unsafe { posim_contour_free(h) };
}

#[test]
fn eiv_region_is_unbounded_at_low_alpha() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { posim_contour_eiv(1.0, 1.0, 2.0, 1.0, &mut h) }, PosimStatus::Ok);
    let mut bounds = [0.0; 8];
    let mut count = 0;
    assert_eq!(unsafe { posim_contour_region(h, 0.1, bounds.as_mut_ptr(), 4, &mut count) }, PosimStatus::Ok);
    assert_eq!(bounds[2 * count - 1], f64::INFINITY);
    let mut v = 0.0;
    assert_eq!(unsafe { posim_contour_eval(h, -1.0, &mut v) }, PosimStatus::Domain);
    assert!(last_error().contains("outside"));
    unsafe { posim_contour_free(h) };
}

#[test]
fn curved_normal_errors_map_to_codes() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { posim_contour_curved_normal(2, 1, 0, 1.0, 1.0, &mut h) }, PosimStatus::Numeric);
    assert!(h.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(unsafe { posim_contour_curved_normal(10, 1, 0, 2.0, -1.0, &mut h) }, PosimStatus::InvalidArgument);
    assert_eq!(unsafe { posim_contour_curved_normal(10, 1, 0, 2.0, 1.0, ptr::null_mut()) }, PosimStatus::NullPointer);
    assert_eq!(unsafe { posim_contour_curved_normal(10, 1, 1, 2.0, 1.0, &mut h) }, PosimStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { posim_contour_eval(h, 2.0, &mut v) }, PosimStatus::Ok);
    assert!(v > 0.0 && v <= 1.0);
    assert_eq!(last_error(), "");
    unsafe { posim_contour_free(h) };
    unsafe { posim_contour_free(ptr::null_mut()) };
}

#[test]
fn null_handles_are_rejected() {
    let mut v = 0.0;
    assert_eq!(unsafe { posim_contour_eval(ptr::null(), 0.0, &mut v) }, PosimStatus::NullPointer);
    assert_eq!(unsafe { posim_contour_possibility(ptr::null(), 0.0, 1.0, &mut v) }, PosimStatus::NullPointer);
}

#[test]
fn laplace_and_credal() {
    let mut v = 0.0;
    assert_eq!(unsafe { posim_asymmetric_laplace_cdf(1.0, 2.0, 0.0, &mut v) }, PosimStatus::Ok);
    // mass left of zero is r1 / (r1 + r2)
    assert!((v - 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(unsafe { posim_asymmetric_laplace_cdf(-1.0, 2.0, 0.0, &mut v) }, PosimStatus::InvalidArgument);

    let contour = [1.0, 0.5, 0.2];
    let mut member = -1;
    let mut alpha = 0.0;
    let ok = [0.5, 0.3, 0.2];
    let st = unsafe { posim_credal_check(ok.as_ptr(), contour.as_ptr(), 3, &mut member, &mut alpha) };
    assert_eq!((st, member, alpha), (PosimStatus::Ok, 1, -1.0));
    let bad = [0.2, 0.3, 0.5];
    let st = unsafe { posim_credal_check(bad.as_ptr(), contour.as_ptr(), 3, &mut member, &mut alpha) };
    assert_eq!((st, member), (PosimStatus::Ok, 0));
    assert!(alpha >= 0.0);
    let unnormalized = [0.2, 0.3, 0.4];
    let st = unsafe { posim_credal_check(unnormalized.as_ptr(), contour.as_ptr(), 3, &mut member, ptr::null_mut()) };
    assert_eq!(st, PosimStatus::InvalidArgument);
}

#[test]
fn error_message_truncates() {
    let mut v = 0.0;
    unsafe { posim_contour_eval(ptr::null(), 0.0, &mut v) };
    let mut small = [0 as std::ffi::c_char; 4];
    let full = unsafe { posim_last_error_message(small.as_mut_ptr(), small.len()) };
    assert!(full > 3);
    assert_eq!(unsafe { CStr::from_ptr(small.as_ptr()) }.to_bytes().len(), 3);
}

#[test]
fn header_declares_every_symbol_and_compiles() {
    let header = include_str!("../include/posim.h");
    for sym in [
        "posim_contour_cauchy",
        "posim_contour_curved_normal",
        "posim_contour_eiv",
        "posim_contour_free",
        "posim_contour_eval",
        "posim_contour_possibility",
        "posim_contour_necessity",
        "posim_contour_region",
        "posim_asymmetric_laplace_cdf",
        "posim_credal_check",
        "posim_last_error_message",
        "POSIM_STATUS_BUFFER_TOO_SMALL = -6",
    ] {
        assert!(header.contains(sym), "{sym} missing from header");
    }
    // syntax check with a C compiler when one is installed
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include/posim.h");
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-std=c99", "-Wall", "-Werror", "-x", "c", include]).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
