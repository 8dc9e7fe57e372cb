use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use wiretap_ffi::*;

fn last_error() -> String {
    let p = wtc_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn bsc(p: f64) -> *mut WtcChannel {
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { wtc_channel_bsc(p, &mut c) }, WtcStatus::Ok);
    c
}

#[test]
fn secrecy_capacity_of_composed_bscs() {
    let (a, b) = (bsc(0.05), bsc(1.0 / 6.0));
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(wtc_wiretap_compose(a, b, &mut w), WtcStatus::Ok);
        let mut cap = WtcCapacity::default();
        let mut input = [0.0; 2];
        assert_eq!(wtc_secrecy_capacity(w, 1e-10, 100_000, &mut cap, input.as_mut_ptr(), 2), WtcStatus::Ok);
        let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
        assert!((cap.value_bits - (h(0.2) - h(0.05))).abs() < 1e-9);
        assert!(cap.converged);
        assert_eq!(input, [0.5, 0.5]);

        let mut short = [0.0; 1];
        assert_eq!(
            wtc_secrecy_capacity(w, 1e-10, 100_000, &mut cap, short.as_mut_ptr(), 1),
            WtcStatus::BufferSize
        );
        let mut d = WtcDegradedness::default();
        assert_eq!(wtc_check_degradedness(w, 1e-9, &mut d), WtcStatus::Ok);
        assert!(d.degraded);
        wtc_wiretap_free(w);
        wtc_channel_free(a);
        wtc_channel_free(b);
    }
}

#[test]
fn reversed_pair_is_not_degraded() {
    // X -> Y is BSC(0.2), X -> Z is BSC(0.1), conditionally independent
    let mut joint = Vec::new();
    for x in 0..2 {
        for y in 0..2 {
            for z in 0..2 {
                let py: f64 = if x == y { 0.8 } else { 0.2 };
                let pz: f64 = if x == z { 0.9 } else { 0.1 };
                joint.push(py * pz);
            }
        }
    }
    let mut w = ptr::null_mut();
    unsafe {
        assert_eq!(wtc_wiretap_from_joint(2, 2, 2, joint.as_ptr(), &mut w), WtcStatus::Ok);
        let mut d = WtcDegradedness::default();
        assert_eq!(wtc_check_degradedness(w, 1e-9, &mut d), WtcStatus::Ok);
        assert!(!d.degraded && d.residual > 1e-3);
        let mut cap = WtcCapacity::default();
        assert_eq!(
            wtc_secrecy_capacity(w, 1e-9, 1000, &mut cap, ptr::null_mut(), 0),
            WtcStatus::NotDegraded
        );
        assert!(last_error().contains("not degraded"));
        wtc_wiretap_free(w);
    }
}

#[test]
fn metrics_and_gaussian() {
    let joint = [0.5, 0.0, 0.0, 0.5];
    let mut m = WtcMetrics::default();
    unsafe {
        assert_eq!(wtc_compute_metrics(2, 2, joint.as_ptr(), 1, 0.5, 0.1, &mut m), WtcStatus::Ok);
        assert!((m.s1 - 1.0).abs() < 1e-12 && (m.s2 - 0.5).abs() < 1e-12);
        assert_eq!(m.s3, 1.0);
        let mut c = 0.0;
        assert_eq!(wtc_gaussian_secrecy_capacity(1.0, 1.0, 4.0, &mut c), WtcStatus::Ok);
        assert!((c - 0.5 * (2.0f64 / 1.25).log2()).abs() < 1e-12);
        assert_eq!(wtc_gaussian_secrecy_capacity(1.0, 4.0, 1.0, &mut c), WtcStatus::InvalidArgument);
    }
}

#[test]
fn errors_are_reported() {
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(wtc_channel_new(2, 2, ptr::null(), &mut c), WtcStatus::NullPointer);
        assert!(last_error().contains("matrix"));
        let bad = [0.5, 0.6, 0.5, 0.5];
        assert_eq!(wtc_channel_new(2, 2, bad.as_ptr(), &mut c), WtcStatus::InvalidArgument);
        assert!(c.is_null());
        assert_eq!(wtc_channel_bsc(0.1, ptr::null_mut()), WtcStatus::NullPointer);
        let missing = CString::new("/nonexistent/channel.ch").unwrap();
        assert_eq!(wtc_channel_read(missing.as_ptr(), &mut c), WtcStatus::Io);
        assert!(last_error().contains("/nonexistent/channel.ch"));
        let mut cap = WtcCapacity::default();
        assert_eq!(wtc_shannon_capacity(ptr::null(), 1e-9, 10, &mut cap, ptr::null_mut(), 0), WtcStatus::NullPointer);
        wtc_channel_free(ptr::null_mut());
        wtc_wiretap_free(ptr::null_mut());
    }
}

#[test]
fn reads_fixture_files() {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let path = CString::new(root.join("bsc10.ch").to_str().unwrap()).unwrap();
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(wtc_channel_read(path.as_ptr(), &mut c), WtcStatus::Ok);
        let mut cap = WtcCapacity::default();
        assert_eq!(wtc_shannon_capacity(c, 1e-12, 100_000, &mut cap, ptr::null_mut(), 0), WtcStatus::Ok);
        assert!((cap.value_bits - 0.531_004_406_410_719).abs() < 1e-9);
        wtc_channel_free(c);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(wtc_version()) }.to_str().unwrap();
    assert_eq!(v, wiretap_core::VERSION);
}

/// Compiles a C program against the generated header and the static library.
#[test]
fn c_program_links_and_runs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/wiretap.h");
    assert!(header.exists(), "header not generated");
    let exe = std::env::current_exe().unwrap();
    let deps = exe.parent().unwrap();
    let lib = deps.parent().unwrap().join("libwiretap_ffi.a");
    if !lib.exists() {
        eprintln!("static library not built at {}, skipping", lib.display());
        return;
    }
    let tmp = tempfile::tempdir().unwrap();
    let bin = tmp.path().join("smoke");
    let status = Command::new("cc")
        .arg(dir.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(dir.join("include"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&bin)
        .status()
        .expect("cc");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("ok\n"));
}
