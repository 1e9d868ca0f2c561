//! C ABI over `posim`.
//!
//! Every function returns a [`PosimStatus`]; results go through out-pointers.
//! On failure a message is kept per thread and can be fetched with
//! [`posim_last_error_message`]. Panics never cross the boundary.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use posim::association::{plausibility_region, posterior_necessity, posterior_possibility, PosteriorContour};
use posim::credal::{credal_membership, DiscreteCredalInstance};
use posim::models::cauchy::cauchy_posterior_contour;
use posim::models::curved_normal::{
    curved_normal_posterior_contour, CurvedNormalModel, CurvedNormalReduction, DensityForm,
};
use posim::models::eiv::{eiv_posterior_contour, EivModel};
use posim::models::laplace::asymmetric_laplace_cdf;
use posim::space::{Interval, SetDescriptor};
use posim::Error;

/// Status codes.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PosimStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    Domain = -3,
    Numeric = -4,
    Unsupported = -5,
    BufferTooSmall = -6,
    Panic = -99,
}

/// Opaque posterior contour handle.
pub struct PosimContour {
    inner: PosteriorContour,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PosimStatus {
    match e {
        Error::Domain(_) => PosimStatus::Domain,
        Error::Numeric(_) | Error::DegeneratePosterior(_) => PosimStatus::Numeric,
        Error::Unsupported(_) => PosimStatus::Unsupported,
        _ => PosimStatus::InvalidArgument,
    }
}

/// Run `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (PosimStatus, String)>) -> PosimStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PosimStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            PosimStatus::Panic
        }
    }
}

fn lift<T>(r: posim::Result<T>) -> Result<T, (PosimStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (PosimStatus, String) {
    (PosimStatus::NullPointer, format!("{what} is null"))
}

unsafe fn handle_out(out: *mut *mut PosimContour, make: impl FnOnce() -> posim::Result<PosteriorContour>) -> PosimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = lift(make())?;
        *out = Box::into_raw(Box::new(PosimContour { inner }));
        Ok(())
    })
}

/// Posterior contour for one Cauchy location observation `y`.
///
/// # Safety
/// `out` must be a valid pointer; release the handle with [`posim_contour_free`].
#[no_mangle]
pub unsafe extern "C" fn posim_contour_cauchy(y: f64, out: *mut *mut PosimContour) -> PosimStatus {
    handle_out(out, || {
        if !y.is_finite() {
            return Err(Error::Argument(format!("observation {y} is not finite")));
        }
        Ok(cauchy_posterior_contour(y))
    })
}

/// Curved-normal posterior from the sample mean `y1` and standard deviation `y2`.
/// `exact_jacobian` nonzero selects the `n + 1` power in the conditional density.
///
/// # Safety
/// `out` must be a valid pointer; release the handle with [`posim_contour_free`].
#[no_mangle]
pub unsafe extern "C" fn posim_contour_curved_normal(
    n: u32,
    sign: i32,
    exact_jacobian: i32,
    y1: f64,
    y2: f64,
    out: *mut *mut PosimContour,
) -> PosimStatus {
    handle_out(out, || {
        let form = if exact_jacobian != 0 { DensityForm::ExactJacobian } else { DensityForm::Printed };
        let model = CurvedNormalModel::new(n as usize, sign, form)?;
        let red = CurvedNormalReduction::new(y1, y2)?;
        curved_normal_posterior_contour(&model, &red)
    })
}

/// Posterior for the ratio `φ` in the exponential errors-in-variables model.
///
/// # Safety
/// `out` must be a valid pointer; release the handle with [`posim_contour_free`].
#[no_mangle]
pub unsafe extern "C" fn posim_contour_eiv(
    lambda1: f64,
    lambda2: f64,
    y1: f64,
    y2: f64,
    out: *mut *mut PosimContour,
) -> PosimStatus {
    handle_out(out, || Ok(eiv_posterior_contour(&EivModel::new(lambda1, lambda2, y1, y2)?)))
}

/// Release a handle. Null is ignored.
///
/// # Safety
/// `contour` must come from a `posim_contour_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn posim_contour_free(contour: *mut PosimContour) {
    if !contour.is_null() {
        drop(Box::from_raw(contour));
    }
}

/// Contour value at `theta`; values outside the parameter space give `POSIM_STATUS_DOMAIN`.
///
/// # Safety
/// `contour` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn posim_contour_eval(contour: *const PosimContour, theta: f64, out: *mut f64) -> PosimStatus {
    guard(|| {
        let c = contour.as_ref().ok_or_else(|| null("contour"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if theta.is_nan() || !c.inner.param_domain().contains(theta) {
            return Err((PosimStatus::Domain, format!("theta {theta} outside the parameter space")));
        }
        *out = c.inner.eval(theta);
        Ok(())
    })
}

unsafe fn measure(
    contour: *const PosimContour,
    lo: f64,
    hi: f64,
    out: *mut f64,
    f: fn(&PosteriorContour, &SetDescriptor) -> posim::Result<f64>,
) -> PosimStatus {
    guard(|| {
        let c = contour.as_ref().ok_or_else(|| null("contour"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        if !(lo <= hi) {
            return Err((PosimStatus::InvalidArgument, format!("empty interval [{lo}, {hi}]")));
        }
        let set = SetDescriptor::interval(Interval::new(lo, hi, lo.is_finite(), hi.is_finite()))
            .clip_to(&c.inner.param_domain());
        *out = lift(f(&c.inner, &set))?;
        Ok(())
    })
}

/// Possibility of the closed interval `[lo, hi]` (infinite ends allowed).
///
/// # Safety
/// `contour` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn posim_contour_possibility(
    contour: *const PosimContour,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> PosimStatus {
    measure(contour, lo, hi, out, posterior_possibility)
}

/// Necessity of the closed interval `[lo, hi]`.
///
/// # Safety
/// `contour` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn posim_contour_necessity(
    contour: *const PosimContour,
    lo: f64,
    hi: f64,
    out: *mut f64,
) -> PosimStatus {
    measure(contour, lo, hi, out, posterior_necessity)
}

/// Plausibility region `{π > alpha}` as `(lower, upper)` pairs written to `bounds`.
///
/// `capacity` counts pairs, so `bounds` must hold `2 * capacity` doubles.
/// `count` always receives the number of pairs; when it exceeds `capacity`
/// nothing is written and `POSIM_STATUS_BUFFER_TOO_SMALL` is returned.
///
/// # Safety
/// `contour` must be a live handle, `count` a valid pointer, and `bounds`
/// valid for `2 * capacity` writes (may be null when `capacity` is 0).
#[no_mangle]
pub unsafe extern "C" fn posim_contour_region(
    contour: *const PosimContour,
    alpha: f64,
    bounds: *mut f64,
    capacity: usize,
    count: *mut usize,
) -> PosimStatus {
    guard(|| {
        let c = contour.as_ref().ok_or_else(|| null("contour"))?;
        if count.is_null() {
            return Err(null("count"));
        }
        let r = lift(plausibility_region(&c.inner, alpha))?;
        *count = r.intervals.len();
        if r.intervals.len() > capacity {
            return Err((
                PosimStatus::BufferTooSmall,
                format!("region has {} pieces, buffer holds {capacity}", r.intervals.len()),
            ));
        }
        if r.intervals.is_empty() {
            return Ok(());
        }
        if bounds.is_null() {
            return Err(null("bounds"));
        }
        for (k, i) in r.intervals.iter().enumerate() {
            *bounds.add(2 * k) = i.lo;
            *bounds.add(2 * k + 1) = i.hi;
        }
        Ok(())
    })
}

/// Asymmetric Laplace CDF with rate `r1` on the positive side and `r2` on the negative side.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn posim_asymmetric_laplace_cdf(r1: f64, r2: f64, x: f64, out: *mut f64) -> PosimStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if !(r1 > 0.0 && r2 > 0.0 && r1.is_finite() && r2.is_finite()) || x.is_nan() {
            return Err((PosimStatus::InvalidArgument, format!("bad rates ({r1}, {r2}) or x {x}")));
        }
        *out = asymmetric_laplace_cdf(r1, r2, x);
        Ok(())
    })
}

/// Whether the discrete probability `probs` lies in the credal set of the
/// possibility contour `contour_values` (both of length `len`).
/// `member` receives 1 or 0; `witness_alpha`, if not null, receives the
/// violated level (or -1 for members).
///
/// # Safety
/// `probs` and `contour_values` must be valid for `len` reads, `member` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn posim_credal_check(
    probs: *const f64,
    contour_values: *const f64,
    len: usize,
    member: *mut i32,
    witness_alpha: *mut f64,
) -> PosimStatus {
    guard(|| {
        if probs.is_null() || contour_values.is_null() || member.is_null() {
            return Err(null("probs, contour_values or member"));
        }
        let p = std::slice::from_raw_parts(probs, len).to_vec();
        let v = std::slice::from_raw_parts(contour_values, len).to_vec();
        let atoms = (0..len).map(|k| k.to_string()).collect();
        let inst = lift(DiscreteCredalInstance::new(atoms, p, v))?;
        let verdict = credal_membership(&inst);
        *member = verdict.member as i32;
        if !witness_alpha.is_null() {
            *witness_alpha = verdict.witness.map_or(-1.0, |w| w.alpha);
        }
        Ok(())
    })
}

/// Copy the calling thread's last error message into `buf` (NUL terminated,
/// truncated to `capacity`). Returns the full message length excluding the NUL;
/// 0 when there is no error.
///
/// # Safety
/// `buf` must be valid for `capacity` writes, or null with `capacity` 0.
#[no_mangle]
pub unsafe extern "C" fn posim_last_error_message(buf: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else {
            if !buf.is_null() && capacity > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}
