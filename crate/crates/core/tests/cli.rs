use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_openxxx"))
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

const SMALL: &str = r#"{
  "n": 2,
  "hbar": [1.0, 0.0],
  "sites": [{"mu": [1, 0], "a": [0.2, 0.0]}],
  "boundary": {"a_split": 1, "c_minus": [0.4, 0.0]},
  "sample_points": "random:3:5",
  "seed": 3
}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> (i32, String) {
    let o = bin().arg(sub).arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn verify_identities_passes_on_example() {
    let dir = tempfile::tempdir().unwrap();
    let (code, err) = run("verify-identities", &example("n2_l2.json"), dir.path(), &[]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(report(dir.path())["passed"], Value::Bool(true));
}

#[test]
fn spectrum_writes_report_and_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let out = dir.path().join("out");
    let (code, err) = run("spectrum", &cfg, &out, &[]);
    assert_eq!(code, 0, "{err}");
    let r = report(&out);
    assert_eq!(r["injective"], Value::Bool(true));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "u_re,u_im,sector,lambda_re,lambda_im,ed_re,ed_im,abs_err");
    assert!(csv.lines().count() > 1);
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run("spectrum", &cfg, &a, &["--seed", "9"]).0, 0);
    assert_eq!(run("spectrum", &cfg, &b, &["--seed", "9"]).0, 0);
    for f in ["report.json", "spectrum.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let zero_hbar = SMALL.replace("\"hbar\": [1.0, 0.0]", "\"hbar\": [0.0, 0.0]");
    let bad_rank = SMALL.replace("\"n\": 2", "\"n\": 7");
    let unknown = SMALL.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1");
    for (name, text) in [("hbar.json", zero_hbar.as_str()), ("rank.json", bad_rank.as_str()), ("unknown.json", unknown.as_str()), ("garbage.json", "{")] {
        let cfg = write(dir.path(), name, text);
        assert_eq!(run("verify-identities", &cfg, dir.path(), &[]).0, 2, "{name}");
    }
    let missing = dir.path().join("absent.json");
    assert_eq!(run("spectrum", &missing, dir.path(), &[]).0, 2);
    let cfg = write(dir.path(), "ok.json", SMALL);
    assert_eq!(run("verify-identities", &cfg, dir.path(), &["--tol", "-1"]).0, 2);
    assert_eq!(run("bethe-check", &cfg, dir.path(), &[]).0, 2);
}

#[test]
fn dual_boundary_is_rejected_for_bethe_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("\"c_minus\": [0.4, 0.0]", "\"c_minus\": [0.4, 0.0], \"k_plus_mode\": \"dual_of_k_minus\"");
    let cfg = write(dir.path(), "dual.json", &text);
    assert_eq!(run("verify-identities", &cfg, &dir.path().join("v"), &[]).0, 0);
    assert_eq!(run("spectrum", &cfg, &dir.path().join("s"), &[]).0, 2);
}

#[test]
fn impossible_tolerance_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", SMALL);
    assert_eq!(run("verify-identities", &cfg, dir.path(), &["--tol", "1e-300"]).0, 1);
}

#[test]
fn solved_roots_pass_bethe_check() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL.replace("\"sites\": [", "\"sites\": [{\"mu\": [1, 0], \"a\": [-0.3, 0.0]}, ");
    let cfg = write(dir.path(), "c.json", &text);
    let solved = dir.path().join("solved");
    assert_eq!(run("bethe-solve", &cfg, &solved, &[]).0, 0);
    let r = report(&solved);
    let sector = r["sectors"].as_array().unwrap().iter().find(|s| s["sector"] == serde_json::json!([1])).unwrap();
    let roots = sector["solutions"][0]["roots"]["roots"].clone();
    let mut value: Value = serde_json::from_str(&text).unwrap();
    value["roots"] = roots;
    let cfg = write(dir.path(), "check.json", &value.to_string());
    let checked = dir.path().join("checked");
    let (code, err) = run("bethe-check", &cfg, &checked, &[]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(report(&checked)["passed"], Value::Bool(true));
}
