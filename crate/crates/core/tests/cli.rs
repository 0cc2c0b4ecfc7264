use std::fs;
use std::process::{Command, Output};

use pfrmt_core::cli::config::RunResult;
use serde_json::Value;

fn pfrmt(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pfrmt"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &tempfile::TempDir, name: &str, json: &str) -> String {
    let p = dir.path().join(name);
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn compute_all_methods_on_trivial_instance() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let cfg = write_config(&dir, "c.json", r#"{"ensemble":"gauss-beta1","N":2,"method":"all","mc_samples":2000}"#);
    let o = pfrmt(&["compute", "--config", &cfg, "--output", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = String::from_utf8(o.stdout).unwrap();
    assert!(summary.contains("deviation pfaffian vs oracle-quadrature"), "{summary}");
    let r = RunResult::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(r.results.len(), 3);
    for m in &r.results {
        assert!((m.value.re - 1.0).abs() < 1e-12 && m.value.im.abs() < 1e-12, "{m:?}");
    }
    assert!(r.deviations.iter().all(|d| d.rel < 1e-12));
}

#[test]
fn real_axis_denominator_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"ensemble":"gauss-beta1","N":2,"kappa1":[[0.5,0.0]]}"#);
    let o = pfrmt(&["compute", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["field"], "kappa1[0]");
    assert_eq!(err["error"]["kind"], "ConfigError");
}

#[test]
fn computation_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // Ndim=4 at 128 nodes per axis exceeds the oracle's node cap.
    let cfg = write_config(&dir, "c.json", r#"{"ensemble":"gauss-beta1","N":4,"method":"oracle-quadrature"}"#);
    let o = pfrmt(&["compute", "--config", &cfg], &[]);
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "BudgetError");
}

#[test]
fn results_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"ensemble":"gauss-beta1","N":2,"kappa1":[[0.2,0.7]],"kappa2":[[0.1,-0.4]],"method":"all","mc_samples":5000,"seed":3}"#,
    );
    let values = |threads: &str| -> Vec<Value> {
        let o = pfrmt(&["compute", "--config", &cfg], &[("PFRMT_THREADS", threads)]);
        assert_eq!(o.status.code(), Some(0));
        let v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v["results"].as_array().unwrap().iter().map(|m| m["value"].clone()).collect()
    };
    assert_eq!(values("1"), values("3"));
    let bad = pfrmt(&["compute", "--config", &cfg], &[("PFRMT_THREADS", "zero")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_quick_passes_and_catches_injected_fault() {
    let o = pfrmt(&["verify", "quick"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let o = pfrmt(&["verify", "quick", "--inject-sign-flip", "--json"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let checks: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> =
        checks.as_array().unwrap().iter().filter(|c| c["passed"] == false).map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(failed, ["even-sum-vs-brute-force"]);
}

#[test]
fn verify_full_catches_injected_fault_against_oracle() {
    let o = pfrmt(&["verify", "full", "--inject-sign-flip", "--json"], &[]);
    assert_eq!(o.status.code(), Some(3));
    let checks: Value = serde_json::from_slice(&o.stdout).unwrap();
    let oracle = checks.as_array().unwrap().iter().find(|c| c["name"] == "even-sum-vs-oracle").unwrap();
    assert_eq!(oracle["passed"], false);
}

#[test]
fn kernel_grid_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"ensemble":"gauss-beta1","N":3}"#);
    let out = dir.path().join("k.csv");
    let o = pfrmt(
        &[
            "kernel-grid", "--config", &cfg, "--kernel", "k12", "--x-from", "-1,0.5", "--x-to", "1,0.5", "--nx", "10",
            "--y-from", "-1,-0.5", "--y-to", "1,-0.5", "--ny", "10", "--output", out.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re_x,im_x,re_y,im_y,re_K,im_K"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|s| s.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 100);
    // x-major: the first ten rows share x.
    assert!(rows[..10].iter().all(|r| r[0] == -1.0 && r[1] == 0.5));

    let o = pfrmt(
        &[
            "kernel-grid", "--config", &cfg, "--kernel", "k22", "--x-from", "-1,0", "--x-to", "1,0.5", "--y-from", "0,1",
            "--y-to", "1,1",
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "OnSupportError");
}

#[test]
fn skew_poly_csv_is_monic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(&dir, "c.json", r#"{"ensemble":"laguerre-beta1","N":2,"nu":1}"#);
    let o = pfrmt(&["skew-poly", "--config", &cfg, "--d", "6"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("degree,pairing_norm,c0,c1,c2,c3,c4,c5"));
    for (j, l) in lines.enumerate() {
        let f: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(f[0] as usize, j);
        assert_eq!(f[2 + j], 1.0);
        assert!(f[3 + j..].iter().all(|&c| c == 0.0));
    }
}

#[test]
fn bench_reports_rows_and_capped_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"ensemble":"gauss-beta1","N":1,"kappa1":[[0.3,0.8]],"kappa2":[[-0.4,0.5]],"quadrature_nodes":128}"#,
    );
    let o = pfrmt(&["bench", "--config", &cfg, "--sweep", "1,2,4"], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0]["capped"], false);
    assert_eq!(rows[2]["capped"], true);
    assert!(r["pfaffian_exponent"].as_f64().unwrap() < 4.0);
}
