use glrt_ffi::*;
use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let p = glrt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn threshold_and_pfa_round_trip() {
    let (mut g, mut p) = (0.0, 0.0);
    unsafe {
        assert_eq!(glrt_threshold_for_pfa(1e-6, 15, &mut g), GlrtStatus::Ok);
        assert_eq!(glrt_pfa(g, 15, &mut p), GlrtStatus::Ok);
    }
    assert!((p / 1e-6 - 1.0).abs() < 1e-12);
}

#[test]
fn pd_paths_agree() {
    let ups = 10f64.powf(-0.5);
    let mut rep = GlrtSeriesReport::default();
    let (mut q, mut h) = (0.0, 0.0);
    unsafe {
        assert_eq!(glrt_pd_series(50, 1e-6, ups, 1e-12, &mut rep), GlrtStatus::Ok);
        assert_eq!(glrt_pd_quadrature(50, 1e-6, ups, 1e-12, &mut q), GlrtStatus::Ok);
        assert_eq!(glrt_pd_foxh(50, 1e-6, ups, 1e-10, &mut h), GlrtStatus::Ok);
    }
    assert!((rep.pd - 0.52886).abs() < 5e-4, "{}", rep.pd);
    assert!(rep.terms_used > 0 && rep.bound_at_stop <= 1e-12);
    assert!((rep.pd - q).abs() < 1e-9);
    assert!((rep.pd - h).abs() < 1e-8);
    let (mut b10, mut b40) = (0.0, 0.0);
    unsafe {
        assert_eq!(glrt_truncation_bound(50, 1e-6, ups, 10, &mut b10), GlrtStatus::Ok);
        assert_eq!(glrt_truncation_bound(50, 1e-6, ups, 40, &mut b40), GlrtStatus::Ok);
    }
    assert!(0.0 < b40 && b40 < b10);
}

#[test]
fn densities_coincide_at_zero_snr() {
    let (mut a, mut b) = (0.0, 0.0);
    unsafe {
        assert_eq!(glrt_pdf_h0(0.7, 10, &mut a), GlrtStatus::Ok);
        assert_eq!(glrt_pdf_h1(0.7, 10, 0.0, &mut b), GlrtStatus::Ok);
    }
    assert_eq!(a, b);
}

#[test]
fn errors_set_status_and_message() {
    let mut g = 0.0;
    unsafe {
        assert_eq!(glrt_threshold_for_pfa(2.0, 15, &mut g), GlrtStatus::Domain);
        assert!(!last_error().is_empty());
        assert_eq!(glrt_threshold_for_pfa(1e-3, 1, &mut g), GlrtStatus::Domain);
        assert_eq!(glrt_pfa(1.0, 15, ptr::null_mut()), GlrtStatus::NullPointer);
    }
    assert_eq!(last_error(), "output pointer is null");
    let name = unsafe { CStr::from_ptr(glrt_status_name(GlrtStatus::Domain as i32)) };
    assert_eq!(name.to_str().unwrap(), "domain error");
    let unknown = unsafe { CStr::from_ptr(glrt_status_name(99)) };
    assert_eq!(unknown.to_str().unwrap(), "unknown");
}

#[test]
fn scenario_handle_lifecycle() {
    let mut sc: *mut GlrtScenario = ptr::null_mut();
    let mut rep = GlrtTrialReport::default();
    unsafe {
        assert_eq!(glrt_scenario_new_equal_snr(3, 22, -7.9, 1.0, 7, &mut sc), GlrtStatus::Ok);
        assert!(!sc.is_null());
        let mut ups = 0.0;
        assert_eq!(glrt_scenario_upsilon(sc, &mut ups), GlrtStatus::Ok);
        assert!((ups - 3.0 * 10f64.powf(-0.79)).abs() < 1e-12);
        assert_eq!(glrt_estimate_rate(sc, GLRT_DETECTOR_POST_GLRT, 1e-2, 100_000, &mut rep), GlrtStatus::Ok);
        assert_eq!(glrt_estimate_rate(sc, 9, 1e-2, 1000, &mut rep), GlrtStatus::Config);
        glrt_scenario_free(sc);
        glrt_scenario_free(ptr::null_mut());
        assert_eq!(glrt_estimate_rate(ptr::null(), 0, 1e-2, 1000, &mut rep), GlrtStatus::NullPointer);
    }
}

#[test]
fn explicit_means_scenario() {
    let (x, y) = ([0.3, 0.1], [0.0, -0.2]);
    let mut sc: *mut GlrtScenario = ptr::null_mut();
    let mut rep = GlrtTrialReport::default();
    unsafe {
        assert_eq!(glrt_scenario_new(8, x.as_ptr(), y.as_ptr(), 2, 1.0, 3, &mut sc), GlrtStatus::Ok);
        assert_eq!(glrt_estimate_rate(sc, GLRT_DETECTOR_LRT, 1e-2, 65_536, &mut rep), GlrtStatus::Ok);
        assert_eq!(rep.trials, 65_536);
        assert!(rep.ci_low <= rep.rate && rep.rate <= rep.ci_high);
        glrt_scenario_free(sc);
        assert_eq!(glrt_scenario_new(8, ptr::null(), y.as_ptr(), 2, 1.0, 3, &mut sc), GlrtStatus::NullPointer);
    }
}

#[test]
fn header_is_valid_c() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/glrt.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for sym in ["glrt_pd_series", "glrt_scenario_free", "GLRT_STATUS_OK", "typedef struct GlrtScenario GlrtScenario"] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    // Syntax check with the system C compiler when one is installed.
    let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"]).arg(&header).output() else {
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
