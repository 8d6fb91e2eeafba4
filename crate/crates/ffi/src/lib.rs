//! C ABI over `glrt_core`.
//!
//! Conventions:
//! - Every function returns a [`GlrtStatus`]; results go through out-pointers.
//! - On failure the message is kept per thread and read with [`glrt_last_error_message`].
//! - Scenarios are opaque heap handles released with [`glrt_scenario_free`].
//! - Panics are caught at the boundary and reported as `GLRT_STATUS_PANIC`.
//!
//! # Safety
//!
//! Pointer arguments must be valid for the access the function documents.
//! Handles must come from this library and must not be used after being freed.
#![allow(clippy::missing_safety_doc)]

use glrt_core::analytic::{
    pd_quadrature, pd_series, pfa_closed_form, threshold_for_pfa, truncation_bound, OperatingPoint,
};
use glrt_core::cli::commands::detector_for;
use glrt_core::detectors::DetectorKind;
use glrt_core::distributions::{pdf_h0, pdf_h1, H0Law, H1Law};
use glrt_core::foxh::{pd_foxh, PdFoxHInputs};
use glrt_core::montecarlo::{estimate_rate, Scenario};
use glrt_core::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlrtStatus {
    Ok = 0,
    NullPointer = 1,
    Domain = 2,
    Pole = 3,
    NonConvergence = 4,
    InfeasibleContour = 5,
    ImaginaryResidue = 6,
    DegenerateSample = 7,
    Bracket = 8,
    InsufficientTrials = 9,
    Config = 10,
    Io = 11,
    Panic = 12,
}

impl From<&Error> for GlrtStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Pole { .. } => GlrtStatus::Pole,
            Error::Domain(_) => GlrtStatus::Domain,
            Error::NonConvergence { .. } => GlrtStatus::NonConvergence,
            Error::InfeasibleContour(_) => GlrtStatus::InfeasibleContour,
            Error::ImaginaryResidue { .. } => GlrtStatus::ImaginaryResidue,
            Error::DegenerateSample => GlrtStatus::DegenerateSample,
            Error::Bracket { .. } => GlrtStatus::Bracket,
            Error::InsufficientTrials { .. } => GlrtStatus::InsufficientTrials,
            Error::Config(_) => GlrtStatus::Config,
            Error::Io(_) => GlrtStatus::Io,
        }
    }
}

/// Detector selector for [`glrt_estimate_rate`].
pub const GLRT_DETECTOR_POST_GLRT: u32 = 0;
pub const GLRT_DETECTOR_PRE_GLRT: u32 = 1;
pub const GLRT_DETECTOR_SQUARE_LAW: u32 = 2;
pub const GLRT_DETECTOR_LRT: u32 = 3;

/// Residue-series result.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GlrtSeriesReport {
    pub pd: f64,
    pub terms_used: u64,
    /// Certified bound on the neglected tail.
    pub bound_at_stop: f64,
    pub elapsed_seconds: f64,
}

/// Monte-Carlo rate estimate with its 95% Wilson interval.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GlrtTrialReport {
    pub trials: u64,
    pub detections: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Trials with an undefined statistic, counted as non-detections.
    pub degenerate: u64,
}

/// Opaque simulation scenario.
pub struct GlrtScenario {
    inner: Scenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

/// Runs `f`, storing its value in `out` and mapping errors and panics to a status.
fn guard<T>(out: *mut T, f: impl FnOnce() -> glrt_core::Result<T>) -> GlrtStatus {
    if out.is_null() {
        set_error("output pointer is null".into());
        return GlrtStatus::NullPointer;
    }
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(v)) => {
            unsafe { out.write(v) };
            GlrtStatus::Ok
        }
        Ok(Err(e)) => {
            set_error(e.to_string());
            GlrtStatus::from(&e)
        }
        Err(_) => {
            set_error("panic inside glrt".into());
            GlrtStatus::Panic
        }
    }
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn glrt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Static name of a status code; unknown codes give "unknown".
#[no_mangle]
pub extern "C" fn glrt_status_name(status: i32) -> *const c_char {
    let s: &'static [u8] = match status {
        0 => b"ok\0",
        1 => b"null pointer\0",
        2 => b"domain error\0",
        3 => b"gamma pole\0",
        4 => b"no convergence\0",
        5 => b"infeasible contour\0",
        6 => b"imaginary residue\0",
        7 => b"degenerate sample\0",
        8 => b"not bracketed\0",
        9 => b"insufficient trials\0",
        10 => b"invalid configuration\0",
        11 => b"i/o error\0",
        12 => b"panic\0",
        _ => b"unknown\0",
    };
    s.as_ptr().cast()
}

/// Threshold on Z that yields `pfa` with `m` samples.
#[no_mangle]
pub unsafe extern "C" fn glrt_threshold_for_pfa(pfa: f64, m: u32, out: *mut f64) -> GlrtStatus {
    guard(out, || threshold_for_pfa(pfa, m))
}

/// False-alarm probability of threshold `gamma`.
#[no_mangle]
pub unsafe extern "C" fn glrt_pfa(gamma: f64, m: u32, out: *mut f64) -> GlrtStatus {
    guard(out, || pfa_closed_form(gamma, m))
}

/// Density of Z under H0.
#[no_mangle]
pub unsafe extern "C" fn glrt_pdf_h0(z: f64, m: u32, out: *mut f64) -> GlrtStatus {
    guard(out, || pdf_h0(z, &H0Law::new(m)?))
}

/// Density of Z under H1 with aggregate SNR `upsilon` (linear).
#[no_mangle]
pub unsafe extern "C" fn glrt_pdf_h1(z: f64, m: u32, upsilon: f64, out: *mut f64) -> GlrtStatus {
    guard(out, || pdf_h1(z, &H1Law::new(m, upsilon)?))
}

/// Detection probability by adaptive quadrature.
#[no_mangle]
pub unsafe extern "C" fn glrt_pd_quadrature(m: u32, pfa: f64, upsilon: f64, tol: f64, out: *mut f64) -> GlrtStatus {
    guard(out, || pd_quadrature(&OperatingPoint::new(m, pfa, upsilon)?, tol))
}

/// Detection probability by the residue series, stopped once the tail bound is below `tol`.
#[no_mangle]
pub unsafe extern "C" fn glrt_pd_series(
    m: u32,
    pfa: f64,
    upsilon: f64,
    tol: f64,
    out: *mut GlrtSeriesReport,
) -> GlrtStatus {
    guard(out, || {
        let r = pd_series(&OperatingPoint::new(m, pfa, upsilon)?, tol)?;
        Ok(GlrtSeriesReport {
            pd: r.pd,
            terms_used: r.terms_used as u64,
            bound_at_stop: r.bound_at_stop,
            elapsed_seconds: r.elapsed.as_secs_f64(),
        })
    })
}

/// Detection probability from the bivariate Fox H-function.
#[no_mangle]
pub unsafe extern "C" fn glrt_pd_foxh(m: u32, pfa: f64, upsilon: f64, tol: f64, out: *mut f64) -> GlrtStatus {
    guard(out, || pd_foxh(&PdFoxHInputs::from_operating_point(&OperatingPoint::new(m, pfa, upsilon)?)?, tol))
}

/// Bound on the series tail beyond `t0` terms at an operating point.
#[no_mangle]
pub unsafe extern "C" fn glrt_truncation_bound(m: u32, pfa: f64, upsilon: f64, t0: u64, out: *mut f64) -> GlrtStatus {
    guard(out, || {
        let op = OperatingPoint::new(m, pfa, upsilon)?;
        truncation_bound(m, upsilon, op.omega(), t0 as usize)
    })
}

fn boxed(sc: glrt_core::Result<Scenario>) -> glrt_core::Result<*mut GlrtScenario> {
    Ok(Box::into_raw(Box::new(GlrtScenario { inner: sc? })))
}

/// Scenario with `n` antennas sharing the per-antenna SNR `snr_db`.
#[no_mangle]
pub unsafe extern "C" fn glrt_scenario_new_equal_snr(
    n: u32,
    m: u32,
    snr_db: f64,
    sigma_sq: f64,
    seed: u64,
    out: *mut *mut GlrtScenario,
) -> GlrtStatus {
    guard(out, || boxed(Scenario::equal_snr(n, m, snr_db, sigma_sq, seed)))
}

/// Scenario with explicit per-antenna echo means `mu_x[i] + j mu_y[i]`, `i < n`.
#[no_mangle]
pub unsafe extern "C" fn glrt_scenario_new(
    m: u32,
    mu_x: *const f64,
    mu_y: *const f64,
    n: usize,
    sigma_sq: f64,
    seed: u64,
    out: *mut *mut GlrtScenario,
) -> GlrtStatus {
    if mu_x.is_null() || mu_y.is_null() {
        set_error("mean arrays are null".into());
        return GlrtStatus::NullPointer;
    }
    let (x, y) = unsafe { (std::slice::from_raw_parts(mu_x, n).to_vec(), std::slice::from_raw_parts(mu_y, n).to_vec()) };
    guard(out, || boxed(Scenario::new(m, x, y, sigma_sq, seed)))
}

/// Releases a scenario; null is ignored.
#[no_mangle]
pub unsafe extern "C" fn glrt_scenario_free(sc: *mut GlrtScenario) {
    if !sc.is_null() {
        drop(unsafe { Box::from_raw(sc) });
    }
}

/// Aggregate SNR `Υ` of a scenario.
#[no_mangle]
pub unsafe extern "C" fn glrt_scenario_upsilon(sc: *const GlrtScenario, out: *mut f64) -> GlrtStatus {
    let Some(sc) = (unsafe { sc.as_ref() }) else {
        set_error("scenario is null".into());
        return GlrtStatus::NullPointer;
    };
    guard(out, || Ok(sc.inner.upsilon()))
}

/// Simulated detection rate of a detector at its analytic threshold for `pfa`.
#[no_mangle]
pub unsafe extern "C" fn glrt_estimate_rate(
    sc: *const GlrtScenario,
    detector: u32,
    pfa: f64,
    trials: u64,
    out: *mut GlrtTrialReport,
) -> GlrtStatus {
    let Some(sc) = (unsafe { sc.as_ref() }) else {
        set_error("scenario is null".into());
        return GlrtStatus::NullPointer;
    };
    guard(out, || {
        let kind = match detector {
            GLRT_DETECTOR_POST_GLRT => DetectorKind::PostGlrt,
            GLRT_DETECTOR_PRE_GLRT => DetectorKind::PreGlrt,
            GLRT_DETECTOR_SQUARE_LAW => DetectorKind::SquareLaw,
            GLRT_DETECTOR_LRT => DetectorKind::Lrt,
            d => return Err(Error::Config(format!("unknown detector {d}"))),
        };
        let sc = &sc.inner;
        let det = detector_for(kind, sc);
        let gamma = det.analytic_threshold(pfa, sc.m_samples, sc.n_antennas)?;
        let r = estimate_rate(&det, gamma, sc, trials)?;
        Ok(GlrtTrialReport {
            trials: r.trials,
            detections: r.detections,
            rate: r.rate,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            degenerate: r.degenerate,
        })
    })
}
