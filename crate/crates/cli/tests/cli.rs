use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_audit-game")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_identical_sweep_twice() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = cli(&["run", "--set", "seeds=4", "--out", path(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let stdout = String::from_utf8_lossy(&o.stdout);
        assert!(stdout.starts_with("run: 30 cells x 4 seeds"), "{stdout}");
    }
    let bytes = std::fs::read(a.join("sweep.json")).unwrap();
    assert_eq!(bytes, std::fs::read(b.join("sweep.json")).unwrap());
    let json: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 30);
}

#[test]
fn invalid_config_exits_nonzero_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.yaml");
    std::fs::write(&cfg, "env: {horizon_T: 12, n_min: 2000}\nstrategies: [{name: drift}]\npolicies: [{name: periodic}]\n").unwrap();
    let out = dir.path().join("out");
    let o = cli(&["run", "--config", path(&cfg), "--out", path(&out)]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_min"), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.exists());

    let o = cli(&["run", "--set", "seeds=0", "--out", path(&out)]);
    assert!(!o.status.success());
    let o = cli(&["run", "--set", "bogus=1", "--out", path(&out)]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn unknown_strategy_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.yaml");
    std::fs::write(&cfg, "strategies: [{name: teleport}]\npolicies: [{name: periodic}]\n").unwrap();
    let o = cli(&["run", "--config", path(&cfg), "--out", path(&dir.path().join("o"))]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("teleport"));
}

#[test]
fn fpr_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["fpr", "--seeds", "20", "--out", path(dir.path())]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("fpr.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
    assert!(dir.path().join("fpr.json").exists());
}

#[test]
fn regime_map_and_sensitivity_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["regime-map", "--n-min", "100,500", "--delta", "0.03,0.05", "--set", "seeds=3", "--out", path(dir.path())]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("regime.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);

    let o = cli(&["sensitivity", "--policy", "suspicion_escalation", "--set", "seeds=3", "--out", path(dir.path())]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(dir.path().join("curves.csv")).unwrap().contains("tpr_drift_vs_delta"));

    let o = cli(&["sensitivity", "--policy", "periodic", "--out", path(&dir.path().join("x"))]);
    assert!(!o.status.success());
}

#[test]
fn oracle_prints_interval() {
    let o = cli(&["oracle", "--p", "0.5", "--n-min", "100", "--n-max", "1000"]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("(0.031, 0.098]"), "{stdout}");
    assert!(stdout.contains("2.4977"));
    assert!(!cli(&["oracle", "--n-min", "0"]).status.success());
}
