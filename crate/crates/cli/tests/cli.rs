use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn mstruct(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mstruct")).current_dir(root()).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn theta_csv_has_schema_and_hits_endpoints() {
    let o = mstruct(&["theta", "--pair", "dStar,d", "--grid", "-1:1:0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,theta,theta_prime,method,residual"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    assert_eq!(rows.len(), 5);
    let at_zero = rows.iter().find(|r| r[0].parse::<f64>().unwrap() == 0.0).unwrap();
    assert!((at_zero[1].parse::<f64>().unwrap() - 0.7563).abs() < 1e-3);
    assert!(rows.iter().all(|r| r[3] == "exact"));
}

#[test]
fn dil_reports_witness() {
    let o = mstruct(&["dil", "--pair", "d,dStar", "--max-length", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["estimate"]["value"], 2.0);
    assert_eq!(v["estimate"]["witness"], "[a]");
}

#[test]
fn identical_pair_is_degenerate() {
    let o = mstruct(&["geodesic", "--pair", "d,d"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn boundary_pair_is_rejected_for_delta() {
    let o = mstruct(&["delta", "--pair", "basis,conedB", "--max-length", "4"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn budget_overrun_exits_5() {
    let o = mstruct(&["ell", "--provider", "basis", "--max-length", "12", "--budget", "1000"]);
    assert_eq!(o.status.code(), Some(5));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"group":{"rank":2},"providers":[{"name":"x","type":"nope"}],"tasks":[]}"#).unwrap();
    let o = mstruct(&["--config", bad.to_str().unwrap(), "ell", "--provider", "x"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mstruct(&["ell", "--provider", "missing"]);
    assert_eq!(o.status.code(), Some(2));
    let o = mstruct(&["theta", "--pair", "dStar,d", "--grid", "0:1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tasks_write_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let o = mstruct(&["tasks", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for name in ["ell_wordS.csv", "dil.json", "delta.json", "theta.csv", "geodesic.csv", "boundary.csv", "transversal.json", "automaton.json"] {
        assert!(dir.path().join(name).is_file(), "missing {name}");
    }
    let auto: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("automaton.json")).unwrap()).unwrap();
    assert_eq!(auto["bijection_passed"], true);
    let geo = std::fs::read_to_string(dir.path().join("geodesic.csv")).unwrap();
    assert!(geo.starts_with("t,gamma_t,delta_from_rho,delta_from_rhostar\n"));
}
