use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use openxxx_ffi::*;

const CONFIG: &str = r#"{"n": 2, "sites": [{"mu": [1, 0], "a": 0.2}, {"mu": [1, 0], "a": -0.3}],
    "boundary": {"a_split": 1, "c_minus": [0.4, 0.0]}, "sample_points": "random:3:1", "seed": 4}"#;

fn load(text: &str) -> (OxStatus, *mut OxModel) {
    let c = CString::new(text).unwrap();
    let mut m = ptr::null_mut();
    let s = unsafe { ox_model_from_json(c.as_ptr(), 0, 0, &mut m) };
    (s, m)
}

fn take(json: *mut c_char) -> serde_json::Value {
    let v = serde_json::from_str(unsafe { CStr::from_ptr(json) }.to_str().unwrap()).unwrap();
    unsafe { ox_string_free(json) };
    v
}

#[test]
fn model_lifecycle_and_transfer_matrix() {
    let (s, m) = load(CONFIG);
    assert_eq!(s, OxStatus::Ok);
    unsafe {
        assert_eq!(ox_model_rank(m), 2);
        let dim = ox_model_quantum_dim(m);
        assert_eq!(dim, 4);
        let mut buf = vec![0.0; 2 * dim * dim];
        assert_eq!(ox_transfer_matrix(m, 0.3, 0.1, buf.as_mut_ptr(), buf.len()), OxStatus::Ok);
        assert!(buf.iter().any(|x| *x != 0.0));
        assert_eq!(ox_transfer_matrix(m, 0.3, 0.1, buf.as_mut_ptr(), 3), OxStatus::BufferTooSmall);
        assert!(!ox_last_error().is_null());
        ox_model_free(m);
    }
}

#[test]
fn vacuum_eigenvalue_is_the_vacuum_entry_of_d() {
    let (_, m) = load(CONFIG);
    unsafe {
        let dim = ox_model_quantum_dim(m);
        let mut buf = vec![0.0; 2 * dim * dim];
        ox_transfer_matrix(m, 0.37, -0.21, buf.as_mut_ptr(), buf.len());
        let counts = [0usize];
        let mut out = [0.0; 2];
        assert_eq!(ox_bethe_eigenvalue(m, 0.37, -0.21, counts.as_ptr(), 1, ptr::null(), out.as_mut_ptr()), OxStatus::Ok);
        // the all-up state is basis vector 0
        assert!((out[0] - buf[0]).abs() < 1e-10 && (out[1] - buf[1]).abs() < 1e-10);
        assert_eq!(ox_bethe_eigenvalue(m, 0.37, -0.21, counts.as_ptr(), 2, ptr::null(), out.as_mut_ptr()), OxStatus::Config);
        ox_model_free(m);
    }
}

#[test]
fn reports_come_back_as_json() {
    let (_, m) = load(CONFIG);
    unsafe {
        let mut json = ptr::null_mut();
        assert_eq!(ox_identity_report(m, &mut json), OxStatus::Ok);
        assert_eq!(take(json)["passed"], serde_json::Value::Bool(true));
        assert_eq!(ox_spectrum_report(m, &mut json), OxStatus::Ok);
        let r = take(json);
        assert_eq!(r["completeness"], serde_json::json!(1.0));
        ox_model_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    let (s, m) = load(r#"{"n": 2, "hbar": 0, "sites": [{"mu": [1, 0]}], "boundary": {"a_split": 1, "c_minus": 0.4}}"#);
    assert_eq!(s, OxStatus::Config);
    assert!(m.is_null());
    let msg = unsafe { CStr::from_ptr(ox_last_error()) }.to_str().unwrap().to_owned();
    assert!(msg.contains("hbar"), "{msg}");
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(ox_model_from_json(ptr::null(), 0, 0, &mut m), OxStatus::NullPointer);
        let bad = [0xffu8, 0];
        assert_eq!(ox_model_from_json(bad.as_ptr().cast(), 0, 0, &mut m), OxStatus::InvalidUtf8);
        let mut json = ptr::null_mut();
        assert_eq!(ox_identity_report(ptr::null(), &mut json), OxStatus::NullPointer);
        assert_eq!(ox_model_quantum_dim(ptr::null()), 0);
        ox_model_free(ptr::null_mut());
        ox_string_free(ptr::null_mut());
    }
}

#[test]
fn c_program_links_against_the_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libopenxxx_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler unavailable");
        return;
    }
    let exe = tempfile::tempdir().unwrap();
    let bin = exe.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "dim 2 ok");
}
