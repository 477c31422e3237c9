use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).current_dir(dir).args(args).output().expect("lab runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

#[test]
fn entropy_report_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["symbolic", "entropy", "--k", "3", "--n", "4", "--oracle"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["coefficient"], 15);
    assert_eq!(r["result"]["oracle_confirmed"], true);
    assert_eq!(r["result"]["pieces"], 32768);
    assert_eq!(r["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(r["config"]["symbolic"]["entropy"]["k"], 3);
}

#[test]
fn identity_distance_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let id = r#"{"breakpoints":["0","1"],"values":["0","1"]}"#;
    std::fs::write(dir.path().join("id.json"), id).unwrap();
    let out = lab(dir.path(), &["map", "distance", "--a", "id.json", "--b", "id.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["sup_distance"], "0/1");
}

#[test]
fn cascade_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let build = lab(dir.path(), &["cascade", "build", "--depth", "3", "--out", "ca.json"]);
    assert_eq!(build.status.code(), Some(0), "{}", String::from_utf8_lossy(&build.stderr));
    let verify = lab(dir.path(), &["cascade", "verify", "ca.json"]);
    assert_eq!(verify.status.code(), Some(0));
    assert_eq!(report(&verify)["result"]["atom_counts"], serde_json::json!([2, 8, 64]));
}

#[test]
fn tampered_cascade_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    lab(dir.path(), &["cascade", "build", "--depth", "2", "--out", "ca.json"]);
    let path = dir.path().join("ca.json");
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    v["result"]["generations"][1][0]["interval"]["hi"] = Value::from("7/8");
    std::fs::write(&path, v.to_string()).unwrap();
    let out = lab(dir.path(), &["cascade", "verify", "ca.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["status"], "refused");
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad_rational = lab(dir.path(), &["map", "eval", "--map", "tent", "--x", "1/0"]);
    assert_eq!(bad_rational.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_rational.stderr).contains("x:"));
    let missing = lab(dir.path(), &["map", "eval", "--map", "missing.json", "--x", "1/2"]);
    assert_eq!(missing.status.code(), Some(2));
    assert_eq!(lab(dir.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn piece_cap_env_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lab"))
        .current_dir(dir.path())
        .env("LAB_PIECE_CAP", "4")
        .args(["map", "iterate", "--map", "tent", "--n", "5"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let ok = lab(dir.path(), &["map", "iterate", "--map", "tent", "--n", "5"]);
    assert_eq!(report(&ok)["result"]["pieces"], 32);
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a.json", "b.json"] {
        let o = lab(dir.path(), &["perturb", "qr-cover", "--map", "tent", "--q", "4", "--r", "2", "--epsilon", "1/20", "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    let b = std::fs::read(dir.path().join("b.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn horseshoe_pipeline_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = lab(dir.path(), &["perturb", "horseshoe", "--map", "tent", "--epsilon", "1/8", "--q", "4", "--out", "hs.json"]);
    assert_eq!(p.status.code(), Some(0));
    assert_eq!(lab(dir.path(), &["horseshoe", "verify", "hs.json"]).status.code(), Some(0));
    let atoms = report(&lab(dir.path(), &["horseshoe", "atoms", "hs.json", "--depth", "2"]));
    assert_eq!(atoms["result"]["atoms"].as_object().unwrap().len(), 6);
    let hyp = lab(dir.path(), &["horseshoe", "hyperbolic", "hs.json", "--depth", "2", "--lambda", "1/2"]);
    assert_eq!(hyp.status.code(), Some(0));
    // The unperturbed tent has no horseshoe on these intervals.
    let refused = lab(dir.path(), &["horseshoe", "verify", "hs.json", "--map", "identity"]);
    assert_eq!(refused.status.code(), Some(1));
}

#[test]
fn birkhoff_csv_series() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("mu.json"), r#"{"atoms":[["2/5","1/2"],["4/5","1/2"]]}"#).unwrap();
    let out = lab(dir.path(), &["measure", "birkhoff", "--map", "tent", "--x", "2/5", "--n", "4", "--target", "mu.json", "--csv", "s.csv"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "n,distance,distance_display_only");
    assert_eq!(lines.len(), 5);
    // The orbit of 2/5 is the 2-cycle itself, so even horizons hit it exactly.
    assert!(lines[2].starts_with("2,0/1,") && lines[4].starts_with("4,0/1,"));
}

#[test]
fn shadow_two_cycle() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("po.json"), r#"{"points":["401/1000","4/5"],"delta":"1/100","periodic":true}"#).unwrap();
    let out = lab(dir.path(), &["shadow", "--map", "tent", "--pseudo-orbit", "po.json", "--epsilon", "1/100"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["result"]["orbit"], serde_json::json!(["2/5", "4/5"]));
    assert_eq!(r["config"]["shadow"]["epsilon"], "1/100");
}

#[test]
fn shrinking_cover_map_feeds_later_commands() {
    let dir = tempfile::tempdir().unwrap();
    let out = lab(dir.path(), &["perturb", "shrinking", "--map", "tent", "--epsilon", "1/8", "--q", "4", "--k", "4", "--out", "s.json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert!(v["result"]["certificates"].as_array().unwrap().iter().all(|c| c["verified"] == true));
    let fp = lab(dir.path(), &["map", "fixed-points", "--map", "s.json"]);
    assert_eq!(fp.status.code(), Some(0));
}
