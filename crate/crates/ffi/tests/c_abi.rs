use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use pfrmt::*;

fn c(re: f64, im: f64) -> PfrmtComplex {
    PfrmtComplex { re, im }
}

fn last_error() -> String {
    let p = pfrmt_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn ensemble(id: &str, nu: u32) -> *mut PfrmtEnsemble {
    let id = CString::new(id).unwrap();
    let mut e = ptr::null_mut();
    assert_eq!(unsafe { pfrmt_ensemble_new(id.as_ptr(), nu, &mut e) }, PfrmtStatus::Ok);
    e
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(pfrmt_version()) }.to_str().unwrap();
    assert_eq!(v, pfrmt_core::VERSION);
}

#[test]
fn ensemble_lifecycle_and_bad_id() {
    let e = ensemble("gauss-beta4", 0);
    assert_eq!(unsafe { pfrmt_ensemble_beta(e) }, 4);
    unsafe { pfrmt_ensemble_free(e) };
    unsafe { pfrmt_ensemble_free(ptr::null_mut()) };

    let bad = CString::new("gauss-beta2").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pfrmt_ensemble_new(bad.as_ptr(), 0, &mut out) }, PfrmtStatus::InvalidArgument);
    assert!(out.is_null());
    assert!(last_error().contains("gauss-beta2"));
}

#[test]
fn z_matches_oracle_and_reports_regime() {
    let e = ensemble("gauss-beta1", 0);
    let k1 = [c(0.3, 0.8)];
    let k2 = [c(-0.4, 0.5)];
    let mut r = PfrmtZResult::default();
    assert_eq!(unsafe { pfrmt_z(e, 3, k1.as_ptr(), 1, k2.as_ptr(), 1, 0, &mut r) }, PfrmtStatus::Ok);
    assert_eq!((r.regime, r.d), (0, 3));
    let mut o = PfrmtComplex::default();
    let mut err = 0.0;
    assert_eq!(
        unsafe { pfrmt_oracle_quadrature(e, 3, k1.as_ptr(), 1, k2.as_ptr(), 1, 128, &mut o, &mut err) },
        PfrmtStatus::Ok
    );
    let dev = ((r.value.re - o.re).powi(2) + (r.value.im - o.im).powi(2)).sqrt() / (o.re.hypot(o.im));
    assert!(dev < 1e-10, "{r:?} vs {o:?}");
    unsafe { pfrmt_ensemble_free(e) };
}

#[test]
fn error_codes_are_distinct_per_failure() {
    let e = ensemble("gauss-beta1", 0);
    let mut r = PfrmtZResult::default();
    let on_axis = [c(0.5, 0.0)];
    assert_eq!(unsafe { pfrmt_z(e, 2, on_axis.as_ptr(), 1, ptr::null(), 0, 0, &mut r) }, PfrmtStatus::OnSupport);
    assert!(last_error().starts_with("OnSupportError"));
    assert_eq!(unsafe { pfrmt_z(e, 2, ptr::null(), 1, ptr::null(), 0, 0, &mut r) }, PfrmtStatus::NullPointer);
    assert_eq!(unsafe { pfrmt_z(e, 2, ptr::null(), 0, ptr::null(), 0, 7, &mut r) }, PfrmtStatus::InvalidArgument);
    assert_eq!(unsafe { pfrmt_z(ptr::null(), 2, ptr::null(), 0, ptr::null(), 0, 0, &mut r) }, PfrmtStatus::NullPointer);
    let mut o = PfrmtComplex::default();
    assert_eq!(
        unsafe { pfrmt_oracle_quadrature(e, 4, ptr::null(), 0, ptr::null(), 0, 1000, &mut o, ptr::null_mut()) },
        PfrmtStatus::Budget
    );
    unsafe { pfrmt_ensemble_free(e) };
}

#[test]
fn pfaffian_of_block_matrix() {
    // [[0, a], [-a, 0]] ⊕ [[0, b], [-b, 0]] has Pf = a b.
    let z = c(0.0, 0.0);
    let (a, b) = (c(2.0, 1.0), c(0.5, -1.0));
    let neg = |p: PfrmtComplex| c(-p.re, -p.im);
    let m = [z, a, z, z, neg(a), z, z, z, z, z, z, b, z, z, neg(b), z];
    let mut out = PfrmtComplex::default();
    assert_eq!(unsafe { pfrmt_pfaffian(m.as_ptr(), 4, &mut out) }, PfrmtStatus::Ok);
    assert!((out.re - 2.0).abs() < 1e-15 && (out.im + 1.5).abs() < 1e-15, "{out:?}");
    let not_skew = [c(1.0, 0.0), z, z, z];
    assert_eq!(unsafe { pfrmt_pfaffian(not_skew.as_ptr(), 2, &mut out) }, PfrmtStatus::Numeric);
}

#[test]
fn kernel_eval_antisymmetry() {
    let e = ensemble("gauss-beta4", 0);
    let xs = [c(0.2, 0.9), c(-0.5, 1.1)];
    let ys = [c(-0.5, 1.1), c(0.2, 0.9)];
    let mut out = [PfrmtComplex::default(); 2];
    assert_eq!(unsafe { pfrmt_kernel_eval(e, 2, 0, xs.as_ptr(), ys.as_ptr(), 2, out.as_mut_ptr()) }, PfrmtStatus::Ok);
    assert!((out[0].re + out[1].re).abs() < 1e-12 && (out[0].im + out[1].im).abs() < 1e-12);
    assert_eq!(
        unsafe { pfrmt_kernel_eval(e, 2, 5, xs.as_ptr(), ys.as_ptr(), 2, out.as_mut_ptr()) },
        PfrmtStatus::InvalidArgument
    );
    unsafe { pfrmt_ensemble_free(e) };
}

#[test]
fn compute_json_round_trip() {
    let cfg = CString::new(r#"{"ensemble":"gauss-beta4","N":1,"kappa2":[[0,0]]}"#).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pfrmt_compute_json(cfg.as_ptr(), &mut out) }, PfrmtStatus::Ok);
    let text = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
    unsafe { pfrmt_string_free(out) };
    let r = pfrmt_core::cli::config::RunResult::from_json(&text).unwrap();
    assert!((r.results[0].value.re - 1.0).abs() < 1e-12);

    let bad = CString::new(r#"{"ensemble":"gauss-beta1","N":2,"kappa1":[[0.5,0.0]]}"#).unwrap();
    assert_eq!(unsafe { pfrmt_compute_json(bad.as_ptr(), &mut out) }, PfrmtStatus::Config);
    assert!(out.is_null());
    assert!(last_error().contains("kappa1[0]"));
}

#[test]
fn header_declares_every_entry_point_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pfrmt.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "pfrmt_version",
        "pfrmt_last_error_message",
        "pfrmt_ensemble_new",
        "pfrmt_ensemble_free",
        "pfrmt_ensemble_beta",
        "pfrmt_z",
        "pfrmt_oracle_quadrature",
        "pfrmt_pfaffian",
        "pfrmt_kernel_eval",
        "pfrmt_compute_json",
        "pfrmt_string_free",
        "typedef struct PfrmtEnsemble PfrmtEnsemble",
    ] {
        assert!(text.contains(f), "{f} missing from header");
    }
    // Syntax-check with the system C compiler when one is installed.
    if let Ok(out) = Command::new("cc").args(["-fsyntax-only", "-x", "c", "-std=c99"]).arg(&header).output() {
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
