use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use thinshell_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(ts_last_error_message()) }.to_string_lossy().into_owned()
}

#[test]
fn body_lifecycle_and_membership() {
    let mut body: *mut TsBody = ptr::null_mut();
    assert_eq!(ts_body_cube(2, 3f64.sqrt(), &mut body), TsStatus::Ok);
    let mut inside = false;
    unsafe {
        assert_eq!(ts_body_contains(body, [0.0, 0.0].as_ptr(), 2, &mut inside), TsStatus::Ok);
        assert!(inside);
        assert_eq!(ts_body_contains(body, [2.0, 0.0].as_ptr(), 2, &mut inside), TsStatus::Ok);
        assert!(!inside);
        assert_eq!(ts_body_contains(body, [0.0; 3].as_ptr(), 3, &mut inside), TsStatus::DimensionMismatch);
        assert!(last_error().contains("dimension mismatch"));
        assert_eq!(ts_body_contains(body, ptr::null(), 2, &mut inside), TsStatus::NullPointer);
        ts_body_free(body);
        ts_body_free(ptr::null_mut());
    }
}

#[test]
fn invalid_bodies_are_rejected() {
    let mut body: *mut TsBody = ptr::null_mut();
    assert_eq!(ts_body_euclidean_ball(3, -1.0, &mut body), TsStatus::InvalidBody);
    assert!(body.is_null());
    assert!(!last_error().is_empty());
    assert_eq!(ts_body_lp_ball(2, 0.5, 1.0, &mut body), TsStatus::InvalidBody);
    assert_eq!(ts_body_cube(2, 1.0, ptr::null_mut()), TsStatus::NullPointer);
}

#[test]
fn sampling_and_thin_shell() {
    let mut body: *mut TsBody = ptr::null_mut();
    assert_eq!(ts_body_cube(16, 1.0, &mut body), TsStatus::Ok);
    unsafe {
        assert_eq!(ts_body_make_isotropic(body), TsStatus::Ok);
        let mut s: *mut TsSamples = ptr::null_mut();
        assert_eq!(ts_sample(body, 50_000, 3, &mut s), TsStatus::Ok);
        assert_eq!((ts_samples_rows(s), ts_samples_dim(s)), (50_000, 16));
        let data = std::slice::from_raw_parts(ts_samples_data(s), 50_000 * 16);
        assert!(data.iter().all(|v| v.abs() <= 3f64.sqrt()));
        let mut st = TsThinShellStats::default();
        assert_eq!(ts_thin_shell_stats(s, &mut st), TsStatus::Ok);
        assert!((st.var_ratio - 0.05).abs() <= st.var_ratio_half_width, "{st:?}");
        assert!(st.shell_dev < 16.0);
        ts_samples_free(s);
        ts_body_free(body);
    }
}

#[test]
fn counterexample_through_ffi() {
    let mut body: *mut TsBody = ptr::null_mut();
    assert_eq!(ts_body_counterexample_cross(4, &mut body), TsStatus::Ok);
    unsafe {
        let mut s: *mut TsSamples = ptr::null_mut();
        assert_eq!(ts_sample(body, 10, 1, &mut s), TsStatus::Ok);
        let data = std::slice::from_raw_parts(ts_samples_data(s), 40);
        assert!(data.chunks(4).all(|r| r.iter().filter(|v| **v != 0.0).count() <= 1));
        ts_samples_free(s);
        ts_body_free(body);
    }
}

#[test]
fn kernel_and_tails() {
    assert_eq!(ts_kernel_char_fn(0.0), 1.0);
    assert_eq!(ts_kernel_char_fn(1.0), 0.0);
    assert!(ts_kernel_density(0.0) > 0.0);
    assert!((ts_kernel_cdf(0.0) - 0.5).abs() < 1e-15);
    let mut m = [0.0; 3];
    unsafe {
        assert_eq!(ts_kernel_moments(m.as_mut_ptr()), TsStatus::Ok);
        assert!((m[0] - 22.251_655_629_139_07).abs() < 1e-9);
        let theta = [0.6, 0.8];
        let (mut f, mut b) = (0.0, 0.0);
        assert_eq!(ts_bernoulli_gamma_tail(theta.as_ptr(), 2, 0.3, 0.2, false, &mut f), TsStatus::Ok);
        assert_eq!(ts_bernoulli_gamma_tail(theta.as_ptr(), 2, 0.3, 0.2, true, &mut b), TsStatus::Ok);
        assert!((f - b).abs() < 1e-9);
        assert_eq!(ts_bernoulli_gamma_tail(theta.as_ptr(), 2, -1.0, 0.2, false, &mut f), TsStatus::InvalidArgument);
    }
}

#[test]
fn kolmogorov_and_identities() {
    let (mut d, mut band) = (0.0, 0.0);
    let vals = [0.0f64];
    unsafe {
        assert_eq!(ts_kolmogorov_normal(vals.as_ptr(), 1, &mut d, &mut band), TsStatus::Ok);
        assert!((d - 0.5).abs() < 1e-15);
        let mut out = [0.0; 4];
        assert_eq!(ts_identities(1.0, 2.0, 1.0, out.as_mut_ptr()), TsStatus::Ok);
        assert!((out[0] - out[1]).abs() < 1e-10 && (out[2] - out[3]).abs() < 1e-10);
        assert_eq!(ts_identities(-1.0, 2.0, 1.0, out.as_mut_ptr()), TsStatus::InvalidArgument);
    }
    let v = unsafe { CStr::from_ptr(ts_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/thinshell.h")
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header()).unwrap();
    for name in [
        "typedef struct TsBody TsBody;",
        "typedef struct TsSamples TsSamples;",
        "TS_STATUS_OK = 0",
        "ts_body_cube(",
        "ts_sample(",
        "ts_thin_shell_stats(",
        "ts_last_error_message(void)",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

/// Compiles and runs a C program against the header and the static library.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libthinshell_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "thinshell.h"
int main(void) {
    TsBody *b = NULL;
    if (ts_body_cube(8, 1.0, &b) != TS_STATUS_OK) return 10;
    if (ts_body_make_isotropic(b) != TS_STATUS_OK) return 11;
    TsSamples *s = NULL;
    if (ts_sample(b, 2000, 7, &s) != TS_STATUS_OK) return 12;
    TsThinShellStats st;
    if (ts_thin_shell_stats(s, &st) != TS_STATUS_OK) return 13;
    if (ts_body_euclidean_ball(2, -1.0, &b) != TS_STATUS_INVALID_BODY) return 14;
    printf("%zu %.6f %s\n", ts_samples_rows(s), st.var_ratio, ts_last_error_message());
    ts_samples_free(s);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("2000 "), "{text}");
    assert!(text.contains("invalid body"), "{text}");
}
