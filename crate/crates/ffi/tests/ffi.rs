use std::ffi::{c_char, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use spinform_ffi::*;

fn last_error() -> String {
    let mut needed = 0usize;
    unsafe { spf_last_error(ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0u8; needed];
    assert_eq!(unsafe { spf_last_error(buf.as_mut_ptr() as *mut c_char, buf.len(), &mut needed) }, SpfStatus::Ok);
    buf.pop();
    String::from_utf8(buf).unwrap()
}

#[test]
fn clifford_handle_round_trip() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { spf_clifford_new(2, 1, &mut h) }, SpfStatus::Ok);
    let mut d = 0usize;
    assert_eq!(unsafe { spf_clifford_spinor_dim(h, &mut d) }, SpfStatus::Ok);
    assert_eq!(d, 2);
    let mut r = 1.0;
    assert_eq!(unsafe { spf_clifford_anticommutator_residual(h, &mut r) }, SpfStatus::Ok);
    assert!(r < 1e-14);
    // γ_0 twice is −1 on a spinor
    let v = [0.3, -0.1, 0.7, 0.2];
    let mut w = [0.0; 4];
    let mut u = [0.0; 4];
    assert_eq!(unsafe { spf_clifford_apply_gamma(h, 0, v.as_ptr(), w.as_mut_ptr(), 2) }, SpfStatus::Ok);
    assert_eq!(unsafe { spf_clifford_apply_gamma(h, 0, w.as_ptr(), u.as_mut_ptr(), 2) }, SpfStatus::Ok);
    for (a, b) in u.iter().zip(v) {
        assert!((a + b).abs() < 1e-15);
    }
    assert_eq!(unsafe { spf_clifford_apply_gamma(h, 3, v.as_ptr(), w.as_mut_ptr(), 2) }, SpfStatus::InvalidArgument);
    assert_eq!(unsafe { spf_clifford_apply_gamma(h, 0, v.as_ptr(), w.as_mut_ptr(), 3) }, SpfStatus::DimensionMismatch);
    assert!(last_error().contains("expected 2"));
    unsafe { spf_clifford_free(h) };
}

#[test]
fn twistor_rank_and_dimensions() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { spf_clifford_new(3, 0, &mut h) }, SpfStatus::Ok);
    let mut rank = 0;
    assert_eq!(unsafe { spf_clifford_twistor_rank(h, 1, &mut rank) }, SpfStatus::Ok);
    assert_eq!(rank, 6);
    assert_eq!(unsafe { spf_clifford_twistor_rank(h, 4, &mut rank) }, SpfStatus::InvalidArgument);
    unsafe { spf_clifford_free(h) };
    let mut dim = 0;
    assert_eq!(unsafe { spf_dim_sigma(4, 2, 4, &mut dim) }, SpfStatus::Ok);
    assert_eq!(dim, 24);
}

#[test]
fn invalid_arguments_and_null_pointers() {
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { spf_clifford_new(0, 0, &mut h) }, SpfStatus::InvalidArgument);
    assert!(h.is_null());
    assert!(last_error().contains("between 1 and"));
    assert_eq!(unsafe { spf_clifford_new(2, 0, ptr::null_mut()) }, SpfStatus::NullPointer);
    let mut d = 0;
    assert_eq!(unsafe { spf_clifford_spinor_dim(ptr::null(), &mut d) }, SpfStatus::NullPointer);
    unsafe {
        spf_clifford_free(ptr::null_mut());
        spf_model_free(ptr::null_mut());
        spf_report_free(ptr::null_mut());
    }
}

#[test]
fn model_catalog_residuals() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { spf_model_new(SpfModelKind::Sphere, 2, 0, &mut m) }, SpfStatus::Ok);
    let mut count = 0;
    assert_eq!(unsafe { spf_model_catalog_len(m, &mut count) }, SpfStatus::Ok);
    assert!(count > 3);
    let x = [0.3, -0.4];
    for i in 0..count {
        let mut r = f64::NAN;
        assert_eq!(unsafe { spf_model_catalog_residual(m, i, x.as_ptr(), 2, &mut r) }, SpfStatus::Ok);
        assert!(r < 1e-8);
    }
    let mut small = [0 as c_char; 4];
    let mut needed = 0;
    assert_eq!(
        unsafe { spf_model_catalog_label(m, 0, small.as_mut_ptr(), small.len(), &mut needed) },
        SpfStatus::BufferTooSmall
    );
    let mut buf = vec![0 as c_char; needed];
    assert_eq!(unsafe { spf_model_catalog_label(m, 0, buf.as_mut_ptr(), buf.len(), &mut needed) }, SpfStatus::Ok);
    assert_eq!(unsafe { spf_model_catalog_residual(m, count, x.as_ptr(), 2, ptr::null_mut()) }, SpfStatus::InvalidArgument);
    assert_eq!(unsafe { spf_model_catalog_residual(m, 0, x.as_ptr(), 3, ptr::null_mut()) }, SpfStatus::DimensionMismatch);
    let far = [5.0, 0.0];
    let mut r = 0.0;
    let mut h = ptr::null_mut();
    assert_eq!(unsafe { spf_model_new(SpfModelKind::Hyperbolic, 2, 0, &mut h) }, SpfStatus::Ok);
    assert_eq!(unsafe { spf_model_catalog_residual(h, 0, far.as_ptr(), 2, &mut r) }, SpfStatus::Domain);
    unsafe {
        spf_model_free(m);
        spf_model_free(h);
    }
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { spf_model_new(SpfModelKind::Flat, 2, 3, &mut bad) }, SpfStatus::InvalidArgument);
}

fn report_json(r: *const SpfReport) -> String {
    let mut needed = 0;
    unsafe { spf_report_json(r, ptr::null_mut(), 0, &mut needed) };
    let mut buf = vec![0u8; needed];
    assert_eq!(unsafe { spf_report_json(r, buf.as_mut_ptr() as *mut c_char, needed, &mut needed) }, SpfStatus::Ok);
    buf.pop();
    String::from_utf8(buf).unwrap()
}

#[test]
fn scenes_and_identities_produce_reports() {
    let scene = CString::new(
        r#"{"schema": "spinform.scene/v1", "model": {"name": "sphere", "dim": 3},
            "fields": [{"catalog": "killing-spinor+0"}]}"#,
    )
    .unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { spf_run_scene(scene.as_ptr(), false, 1, 8, &mut r) }, SpfStatus::Ok);
    let mut pass = false;
    assert_eq!(unsafe { spf_report_pass(r, &mut pass) }, SpfStatus::Ok);
    assert!(pass);
    let first = report_json(r);
    let mut again = ptr::null_mut();
    assert_eq!(unsafe { spf_run_scene(scene.as_ptr(), false, 1, 8, &mut again) }, SpfStatus::Ok);
    assert_eq!(first, report_json(again));
    assert!(first.contains("\"schema\": \"spinform.report/v1\""));
    unsafe {
        spf_report_free(r);
        spf_report_free(again);
    }

    let broken = CString::new("{ \"schema\": ").unwrap();
    assert_eq!(unsafe { spf_run_scene(broken.as_ptr(), false, 1, 8, &mut r) }, SpfStatus::Parse);
    assert_eq!(unsafe { spf_run_scene(ptr::null(), false, 1, 8, &mut r) }, SpfStatus::NullPointer);

    let mut ids = ptr::null_mut();
    assert_eq!(unsafe { spf_identities(2, 0, 3, &mut ids) }, SpfStatus::Ok);
    assert_eq!(unsafe { spf_report_pass(ids, &mut pass) }, SpfStatus::Ok);
    assert!(pass);
    unsafe { spf_report_free(ids) };
    assert_eq!(unsafe { spf_identities(2, 0, 0, &mut ids) }, SpfStatus::InvalidArgument);
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/spinform.h")).unwrap();
    for name in [
        "spf_last_error",
        "spf_clifford_new",
        "spf_clifford_apply_gamma",
        "spf_clifford_twistor_rank",
        "spf_model_new",
        "spf_model_catalog_residual",
        "spf_run_scene",
        "spf_report_json",
        "SPF_STATUS_BUFFER_TOO_SMALL",
        "typedef struct SpfModel SpfModel",
    ] {
        assert!(header.contains(name), "{name}");
    }
}

#[test]
fn c_program_links_against_the_static_library() {
    let Ok(exe) = std::env::current_exe() else { return };
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libspinform_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler not available");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    std::fs::write(
        &src,
        r#"
#include <stdio.h>
#include "spinform.h"
int main(void) {
    SpfClifford *h = NULL;
    if (spf_clifford_new(3, 0, &h) != SPF_STATUS_OK) return 1;
    size_t rank = 0;
    if (spf_clifford_twistor_rank(h, 1, &rank) != SPF_STATUS_OK) return 2;
    spf_clifford_free(h);
    if (spf_clifford_new(0, 0, &h) != SPF_STATUS_INVALID_ARGUMENT) return 3;
    char msg[256];
    if (spf_last_error(msg, sizeof msg, NULL) != SPF_STATUS_OK) return 4;
    printf("%zu|%s\n", rank, msg);
    return 0;
}
"#,
    )
    .unwrap();
    let bin = dir.path().join("smoke");
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let status = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("6|"), "{text}");
    assert!(text.contains("between 1 and"));
}
